#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>

#include "xysim/harness.hpp"
#include "xysim/io.hpp"
#include "xysim/parallel.hpp"

using namespace xysim;
using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {
json load_summary(const std::string& dir) {
  std::ifstream in(dir + "/summary.json");
  REQUIRE(in.good());
  return json::parse(in);
}

struct TmpDir {
  fs::path path;
  explicit TmpDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
  }
  ~TmpDir() { fs::remove_all(path); }
};
}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("config parsing") {
  CHECK_THROWS_AS(Config::parse_string("a=1\n"), ConfigError);                 // no schema
  CHECK_THROWS_AS(Config::parse_string("schema=1\nbad line\n"), ConfigError);  // no '='
  CHECK_THROWS_AS(Config::parse_string("schema=1\nk=1\nk=2\n"), ConfigError);  // duplicate
  const auto cfg = Config::parse_string(
      "schema=1\nlattice.lx=3 # comment\nlist=1, 2.5, pi\nflag=true\n");
  CHECK(cfg.get_int("lattice.lx") == 3);
  const auto lst = cfg.get_double_list("list");
  REQUIRE(lst.size() == 3);
  CHECK(lst[2] == doctest::Approx(M_PI));
  CHECK(cfg.get_bool("flag", false));
  CHECK(cfg.get_double("missing", 2.5) == 2.5);
  CHECK_THROWS_AS(cfg.get_double("missing"), ConfigError);
}

TEST_CASE("sample set io round trip") {
  SampleSet s;
  s.n_q = 6;
  s.m = 3;
  s.seed = 42;
  s.basis_label = "Z";
  s.add(0b010101, 7);
  s.add(0b111000, 3);
  s.finalize();
  const std::string text = sample_set_to_text(s);
  CHECK(text.find("010101 7") != std::string::npos);  // site 0 rightmost
  const auto back = sample_set_from_text(text);
  CHECK(back.counts == s.counts);
  CHECK(back.n_q == 6);
  CHECK(back.m == 3);
  CHECK(back.seed == 42);
}

TEST_CASE("quench driver on a small lattice") {
  TmpDir tmp("xysim_test_quench");
  const auto cfg = Config::parse_string(
      "schema=1\nseed=5\nlattice.lx=3\nlattice.ly=2\n"
      "hamiltonian.g_mhz=10\nhamiltonian.disorder_width_mhz=1\n"
      "quench.t_ns=0,40\nquench.n_disorder=2\nquench.shots=2000\n");
  REQUIRE(run_quench(cfg, tmp.path.string()) == 0);
  const auto summary = load_summary(tmp.path.string());
  CHECK(summary["protocol"] == "quench");
  // t = 0: all samples equal the initial string
  const auto f = read_text_file((tmp.path / "samples/quench_i0_t0.txt").string());
  const auto s0 = sample_set_from_text(f);
  CHECK(s0.counts.size() == 1);
  CHECK(s0.counts[0].second == 2000);
  CHECK(fs::exists(tmp.path / "manifest.txt"));
  CHECK(fs::exists(tmp.path / "evolution_log.csv"));
  CHECK(fs::exists(tmp.path / "schmidt_spectrum.csv"));
}

TEST_CASE("determinism across worker counts") {
  TmpDir tmp1("xysim_det_1"), tmp2("xysim_det_2");
  const auto cfg = Config::parse_string(
      "schema=1\nseed=9\nlattice.lx=3\nlattice.ly=2\n"
      "hamiltonian.g_mhz=10\nquench.t_ns=25\nquench.n_disorder=1\nquench.shots=5000\n");
  set_num_threads(1);
  run_quench(cfg, tmp1.path.string());
  set_num_threads(2);
  run_quench(cfg, tmp2.path.string());
  set_num_threads(0);
  CHECK(read_text_file((tmp1.path / "summary.json").string()) ==
        read_text_file((tmp2.path / "summary.json").string()));
  CHECK(read_text_file((tmp1.path / "samples/quench_i0_t0.txt").string()) ==
        read_text_file((tmp2.path / "samples/quench_i0_t0.txt").string()));
}

TEST_CASE("kz driver diabatic limit") {
  TmpDir tmp("xysim_test_kz");
  const auto cfg = Config::parse_string(
      "schema=1\nseed=3\nlattice.lx=3\nlattice.ly=2\n"
      "hamiltonian.gm_mhz=20\nhamiltonian.stagger_mhz=30\n"
      "kz.t_r_ns=0.001\n");
  REQUIRE(run_kz(cfg, tmp.path.string()) == 0);
  const auto summary = load_summary(tmp.path.string());
  const auto& rec = summary["cells"][0]["checkpoints"][0];
  CHECK(std::abs(rec["eps"].get<double>()) < 1e-3);            // still the Neel state
  CHECK_FALSE(rec["correlation"]["exp_fit_valid"].get<bool>());  // nothing to fit
}

TEST_CASE("excitations with n0=0 reproduces the kz cell") {
  TmpDir tkz("xysim_eq_kz"), tex("xysim_eq_ex");
  const std::string common =
      "schema=1\nseed=31\nlattice.lx=3\nlattice.ly=2\n"
      "hamiltonian.gm_mhz=20\nhamiltonian.stagger_mhz=30\n";
  const auto cfg_kz = Config::parse_string(common + "kz.t_r_ns=12\n");
  const auto cfg_ex = Config::parse_string(
      common + "excitations.t_r_ns=12\nexcitations.n0=0\nexcitations.placements=1\n");
  run_kz(cfg_kz, tkz.path.string());
  run_excitations(cfg_ex, tex.path.string());
  const auto s_kz = load_summary(tkz.path.string());
  const auto s_ex = load_summary(tex.path.string());
  const auto& a = s_kz["cells"][0]["checkpoints"][0];
  const auto& b = s_ex["cells"][0]["checkpoints"][0];
  for (const std::string key : {"eps", "sigma_eps", "n_v"})
    CHECK(a[key].get<double>() == b[key].get<double>());
  CHECK(a["correlation"]["xi"].get<double>() == b["correlation"]["xi"].get<double>());
}

TEST_CASE("dimer driver closed cases") {
  TmpDir tmp("xysim_test_dimer");
  // uniform singlets, t = 0: eps per covered bond is -1, currents vanish
  const auto cfg = Config::parse_string(
      "schema=1\nseed=8\nlattice.lx=4\nlattice.ly=2\n"
      "hamiltonian.g_mhz=10\ndimer.phi=pi\ndimer.t_ns=0\n");
  REQUIRE(run_dimer(cfg, tmp.path.string()) == 0);
  const auto summary = load_summary(tmp.path.string());
  const auto& rec = summary["checkpoints"][0];
  // 4 covered horizontal bonds of 10 total
  CHECK(rec["eps"].get<double>() == doctest::Approx(-4.0 / 10.0));
  CHECK(rec["max_spin_current"].get<double>() < 1e-10);

  // phi = pi/2: unit current on every covered bond at t = 0
  TmpDir tmp2("xysim_test_dimer2");
  const auto cfg2 = Config::parse_string(
      "schema=1\nseed=8\nlattice.lx=4\nlattice.ly=2\n"
      "hamiltonian.g_mhz=10\ndimer.phi=pi/2\ndimer.t_ns=0\n");
  run_dimer(cfg2, tmp2.path.string());
  const auto s2 = load_summary(tmp2.path.string());
  CHECK(s2["checkpoints"][0]["max_spin_current"].get<double>() == doctest::Approx(1.0));

  // odd width cannot host the covering
  const auto bad = Config::parse_string(
      "schema=1\nseed=8\nlattice.lx=3\nlattice.ly=2\nhamiltonian.g_mhz=10\ndimer.t_ns=0\n");
  TmpDir tmp3("xysim_test_dimer3");
  CHECK_THROWS_AS(run_dimer(bad, tmp3.path.string()), std::invalid_argument);
}

TEST_CASE("scan self-consistency") {
  TmpDir tmp("xysim_test_scan");
  const auto cfg = Config::parse_string(
      "schema=1\nseed=12\nlattice.lx=3\nlattice.ly=2\n"
      "hamiltonian.g_mhz=10\nhamiltonian.gxnx_frac=0.08\nhamiltonian.gnxx_frac=0.05\n"
      "hamiltonian.disorder_width_mhz=1\n"
      "scan.t_ns=120\nscan.shots=100000\nscan.dgxnx_khz=-25,0,25\nscan.dgnxx_khz=-25,0,25\n");
  REQUIRE(run_scan(cfg, tmp.path.string()) == 0);
  const auto summary = load_summary(tmp.path.string());
  CHECK(summary["argmax_dgxnx_khz"].get<double>() == doctest::Approx(0.0));
  CHECK(summary["argmax_dgnxx_khz"].get<double>() == doctest::Approx(0.0));
}

TEST_CASE("protocol dispatch and config failure") {
  const auto cfg = Config::parse_string("schema=1\nseed=1\nprotocol=nosuch\n");
  CHECK_THROWS_AS(run_protocol(cfg, "unused_dir"), ConfigError);
}

TEST_SUITE_END();
