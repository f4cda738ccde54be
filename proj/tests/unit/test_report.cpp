#include <doctest.h>

#include <filesystem>

#include "helpers.hpp"
#include "voe/errors.hpp"
#include "voe/report.hpp"

using namespace voe;

TEST_CASE("sha256 test vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 0.5602499999999999, 1e-300, -2.5}) {
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(0.5) == "0.5");
}

TEST_CASE("value tables") {
  ValueReport r;
  r.r_baseline = 0.5;
  r.r_x = 0.75;
  r.r_z = {{"lime", 0.625}};
  r.r_ah = 0.55;
  r.r_ah_z = {{"lime", 0.7}};
  r.delta_e = 0.25;
  r.ci["delta_e"] = {0.2, 0.3};
  const auto csv = values_csv(r);
  CHECK(csv.rfind("quantity,value,ci_low,ci_high\n", 0) == 0);
  CHECK(csv.find("delta_e,0.25,0.2,0.3\n") != std::string::npos);
  CHECK(csv.find("r_x,0.75,,\n") != std::string::npos);
  CHECK(span_table_csv(r) ==
        "explanation,benchmark,value\n"
        "lime,R_baseline,0.5\n"
        "lime,R_Z,0.625\n"
        "lime,R_AH,0.55\n"
        "lime,R_AH_Z,0.7\n"
        "lime,R_X,0.75\n");
  r.r_ah.reset();
  r.r_ah_z.clear();
  CHECK(span_table_csv(r).find("R_AH") == std::string::npos);
}

TEST_CASE("behavioral table") {
  ValueReport r;
  r.behavioral[""] = {0.6, 0.5, 0.1, 10, 12};
  r.behavioral["heatmap"] = {0.7, 0.5, 0.2, 5, 12};
  r.ci["delta_behavioral:heatmap"] = {0.1, 0.3};
  CHECK(behavioral_csv(r) ==
        "arm,b,b_not_e,delta,ci_low,ci_high,n_with,n_without\n"
        ",0.6,0.5,0.1,,,10,12\n"
        "heatmap,0.7,0.5,0.2,0.1,0.3,5,12\n");
}

TEST_CASE("manifest hashes what it writes") {
  const auto dir = std::filesystem::temp_directory_path() / "voe-report-test";
  std::filesystem::remove_all(dir);
  Manifest m(dir);
  m.write("a.txt", "abc");
  m.write("sub/b.txt", "");
  m.finish({{"seed", 3}});
  const auto j = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  CHECK(j.at("seed") == 3);
  REQUIRE(j.at("files").size() == 2);
  CHECK(j["files"][0]["path"] == "a.txt");
  CHECK(j["files"][0]["sha256"] == sha256_hex("abc"));
  CHECK(sha256_file(dir / "sub/b.txt") == sha256_hex(""));
  CHECK_THROWS_AS(sha256_file(dir / "missing"), DataError);
  std::filesystem::remove_all(dir);
}
