#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

// The attack side may only see target models through ffa::BlackBox.
TEST_CASE("attack sources never include target-model headers") {
  const fs::path root = FFA_SOURCE_DIR;
  std::size_t scanned = 0;
  for (const char* sub : {"src/gan", "src/attack", "src/baselines", "include/ffa/gan",
                          "include/ffa/attack", "include/ffa/baselines"}) {
    for (const auto& entry : fs::recursive_directory_iterator(root / sub)) {
      if (!entry.is_regular_file()) continue;
      std::ifstream in(entry.path());
      std::ostringstream text;
      text << in.rdbuf();
      INFO(entry.path().string());
      CHECK(text.str().find("ffa/targets") == std::string::npos);
      CHECK(text.str().find("targets::") == std::string::npos);
      ++scanned;
    }
  }
  CHECK(scanned >= 10);
}

TEST_CASE("attack libraries do not link the target library") {
  const std::string attack_links = FFA_ATTACK_LINKS;
  const std::string baseline_links = FFA_BASELINE_LINKS;
  CHECK(attack_links.find("ffa_targets") == std::string::npos);
  CHECK(baseline_links.find("ffa_targets") == std::string::npos);
  CHECK(attack_links.find("ffa_blackbox") != std::string::npos);
}
