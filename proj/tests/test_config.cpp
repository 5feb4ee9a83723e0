#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "fieldctr/config.hpp"
#include "fieldctr/error.hpp"
#include "fieldctr/rng.hpp"

using namespace fieldctr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("fieldctr_cfg_" + std::to_string(Rng(::getpid()).next_u64()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.ini";
  std::ofstream(p) << text;
  return p;
}

const std::string kBase = R"(# example run
[data]
schema = schema.tsv
raw = ratings.csv
rating_threshold = 4
drop_neutral = 3

[model]
backbone = deepfm
embedding_dim = 16
dnn_hidden = 64, 64

[train]
learning_rate = 0.002
batch_size = 128
seed = 9

[enhance]
lambda_kl = 0.1
lambda_fm = 0.05
fie_mode = explicit
)";

}  // namespace

TEST_CASE("config parses sections, keys and lists") {
  TempDir tmp;
  const RunConfig cfg = load_run_config(write_config(tmp.path, kBase));
  CHECK(cfg.schema_path == "schema.tsv");
  CHECK(cfg.rating_threshold == 4.0);
  REQUIRE(cfg.drop_neutral.has_value());
  CHECK(*cfg.drop_neutral == 3.0);
  CHECK(cfg.backbone == "deepfm");
  CHECK(cfg.embedding_dim == 16);
  CHECK(cfg.dnn_hidden == std::vector<std::size_t>{64, 64});
  CHECK(cfg.train.learning_rate == 0.002);
  CHECK(cfg.train.batch_size == 128);
  CHECK(cfg.train.seed == 9);
  CHECK(cfg.lambda_kl == 0.1);
  CHECK(cfg.lambda_fm == 0.05);
  CHECK(cfg.fie_mode == "explicit");
  // Defaults.
  CHECK(cfg.train.patience == 3);
  CHECK(cfg.lambda_kl_grid == tuned_lambda_grid());
  CHECK(cfg.samples_per_field == 1000);
}

TEST_CASE("config rejects unknown sections and keys") {
  TempDir tmp;
  CHECK_THROWS_WITH_AS(
      load_run_config(write_config(tmp.path, "[nope]\nx = 1\n")),
      doctest::Contains("unknown section"), Error);
  CHECK_THROWS_WITH_AS(
      load_run_config(write_config(tmp.path, "[train]\nlr = 1\n")),
      doctest::Contains("unknown key"), Error);
  CHECK_THROWS_WITH_AS(
      load_run_config(write_config(tmp.path, "stray = 1\n")),
      doctest::Contains("outside any section"), Error);
}

TEST_CASE("config validation catches bad values") {
  TempDir tmp;
  CHECK_THROWS_AS(load_run_config(write_config(
                      tmp.path, "[train]\nlearning_rate = 0\n")),
                  Error);
  CHECK_THROWS_AS(load_run_config(write_config(
                      tmp.path, "[model]\nbackbone = transformer\n")),
                  Error);
  CHECK_THROWS_AS(load_run_config(write_config(
                      tmp.path, "[corpus]\nsamples_per_field = 0\n")),
                  Error);
  CHECK_THROWS_AS(load_run_config(write_config(
                      tmp.path, "[enhance]\nlambda_kl = -1\n")),
                  Error);
  CHECK_THROWS_WITH_AS(
      load_run_config(
          write_config(tmp.path, "[sweep]\nlambda_kl_grid = 0.2\n")),
      doctest::Contains("tuned grid"), Error);
  // Subsets of the tuned grid are fine.
  const RunConfig ok = load_run_config(
      write_config(tmp.path, "[sweep]\nlambda_kl_grid = 0.01, 1\n"));
  CHECK(ok.lambda_kl_grid == std::vector<double>{0.01, 1.0});
}

TEST_CASE("environment variables override any scalar") {
  TempDir tmp;
  setenv("FIELDCTR_TRAIN_BATCH_SIZE", "2048", 1);
  setenv("FIELDCTR_ENHANCE_FIE_MODE", "implicit", 1);
  const RunConfig cfg = load_run_config(write_config(tmp.path, kBase));
  unsetenv("FIELDCTR_TRAIN_BATCH_SIZE");
  unsetenv("FIELDCTR_ENHANCE_FIE_MODE");
  CHECK(cfg.train.batch_size == 2048);
  CHECK(cfg.fie_mode == "implicit");
  CHECK(cfg.train.learning_rate == 0.002);  // untouched
}
