#include <fstream>
#include <thread>

#include "doctest.h"
#include "stemmer.hpp"
#include "support.hpp"

using namespace kpforge;

TEST_CASE("stem_word examples") {
  CHECK(stem_word("sky") == "sky");
  CHECK(stem_word("caresses") == "caress");
  CHECK(stem_word("ponies") == "poni");
  CHECK(stem_word("relational") == "relat");
  CHECK(stem_word("generalization") == "gener");
  CHECK(stem_word("as") == "as");
  CHECK(stem_word("3d") == "3d");
  CHECK(stem_word(".") == ".");
}

TEST_CASE("stem_phrase examples") {
  CHECK(stem_phrase(std::string_view("machine learning")) == "machin learn");
  CHECK(stem_phrase(std::string_view("a")) == "a");
  CHECK(stem_phrase(std::string_view("integral equations")) == stem_phrase(std::string_view("integral equation")));
  CHECK(stem_phrase(std::string_view("")) == "");
}

TEST_CASE("stem_phrase distributes over concatenation") {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"neural keyphrase", "generation models"}, {"a", "b c"}, {"contrastive", "learning"}};
  for (const auto& [a, b] : cases)
    CHECK(stem_phrase(std::string_view(a + " " + b)) ==
          stem_phrase(std::string_view(a)) + " " + stem_phrase(std::string_view(b)));
}

TEST_CASE("reference vocabulary agreement") {
  std::ifstream voc(testing::data_path("porter_voc.txt"));
  std::ifstream out(testing::data_path("porter_output.txt"));
  REQUIRE(voc);
  REQUIRE(out);
  std::string w, expected;
  std::size_t total = 0, agree = 0;
  while (voc >> w && out >> expected) {
    ++total;
    agree += stem_word(w) == expected;
  }
  REQUIRE(total > 20000);
  CHECK(static_cast<double>(agree) / static_cast<double>(total) >= 0.999);
}

TEST_CASE("stem cache is a pure memo under concurrent use") {
  StemCache cache;
  const std::vector<std::string> words = {"running", "generalization", "ponies", "caresses", "models", "sky"};
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&] {
      for (int r = 0; r < 200; ++r)
        for (const auto& w : words)
          if (cache.stem(w) != stem_word(w)) ++mismatches;
    });
  for (auto& t : threads) t.join();
  CHECK(mismatches == 0);
}
