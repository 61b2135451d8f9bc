#include "yr/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace yr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("yr_test_io_" + name);
  fs::remove_all(p);
  return p;
}

} // namespace

TEST_CASE("sha256_hex: published vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("RunReport: manifest, flags and checks") {
  const fs::path dir = scratch("report");
  RunReport rep("unit", dir, {{"seed", 3}, {"n_steps", 8}});
  rep.write_file("b.csv", "t,x_1\n0,0\n");
  rep.write_file("a.csv", "abc");
  rep.add_flag("left_box");
  rep.add_flag("left_box");
  rep.add_flag("another");
  rep.add_check("ok", true, 1.0, 0.0);
  CHECK(rep.all_pass());
  rep.add_check("bad", false, 2.0, 1.0, "detail");
  CHECK_FALSE(rep.all_pass());
  rep.results()["answer"] = 42;
  rep.finish();

  std::ifstream in(dir / "report.json");
  const Json j = Json::parse(in);
  CHECK(j.at("command") == "unit");
  CHECK(j.at("config").at("seed") == 3);
  CHECK(j.at("all_pass") == false);
  CHECK(j.at("flags") == Json::array({"another", "left_box"}));
  REQUIRE(j.at("manifest").size() == 2);
  CHECK(j.at("manifest")[0].at("file") == "a.csv");
  CHECK(j.at("manifest")[0].at("sha256") == sha256_hex("abc"));
  CHECK(j.at("results").at("answer") == 42);
  CHECK(j.at("checks").size() == 2);
  CHECK(j.contains("timing"));
  CHECK_FALSE(rep.to_json(false).contains("timing"));
  CHECK(fs::exists(dir / "a.csv"));
  fs::remove_all(dir);
}

TEST_CASE("RunReport: untimed JSON is reproducible") {
  const fs::path d1 = scratch("r1"), d2 = scratch("r2");
  RunReport a("x", d1, {{"k", 1}}), b("x", d2, {{"k", 1}});
  a.write_file("f.csv", "1\n");
  b.write_file("f.csv", "1\n");
  CHECK(a.to_json(false).dump() == b.to_json(false).dump());
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("svg_loglog: well-formed with one polyline per series") {
  const std::string s = svg_loglog("t", "x", "y", {{"a", {0.1, 1.0, 10.0}, {1.0, 2.0, 4.0}}, {"b", {1.0, 2.0}, {-1.0, 3.0}}});
  CHECK(s.rfind("<svg", 0) == 0);
  CHECK(s.find("</svg>") != std::string::npos);
  std::size_t count = 0;
  for (std::size_t p = s.find("<polyline"); p != std::string::npos; p = s.find("<polyline", p + 1)) {
    ++count;
  }
  CHECK(count >= 1);
  CHECK(s.find(">a<") != std::string::npos);
  CHECK(s.find("nan") == std::string::npos);
}

TEST_CASE("write_field_csv: header and row count") {
  const TimeGrid tg(1.0, 4);
  const SpaceGrid sg(1, 1.0, 4);
  const AveragedField a = tabulate_field(tg, sg, 1, [](double t, const Eigen::VectorXd &x) {
    return Eigen::VectorXd::Constant(1, t * x[0]);
  });
  std::ostringstream os;
  write_field_csv(os, a);
  const std::string s = os.str();
  CHECK(s.rfind("t,x,a_1\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 1 + tg.n_nodes() * sg.n_nodes());

  const Json side = field_sidecar(a, {{"seed", 1}});
  CHECK(side.contains("provenance"));
}

TEST_CASE("path_csv: round trip") {
  const SampledPath p = gen_fbm({0.7, 2, 5}, TimeGrid(1.0, 16));
  std::istringstream in(path_csv(p));
  const SampledPath q = read_path_csv(in);
  CHECK(sup_distance(p, q) == 0.0);
}
