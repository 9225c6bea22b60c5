#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <png.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "phantoms.hpp"
#include "stagetv/cli.hpp"
#include "stagetv/errors.hpp"
#include "stagetv/io.hpp"
#include "stagetv/metrics.hpp"

using namespace stagetv;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("stagetv_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream(path, std::ios::binary) << bytes;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

void write_png(const std::string& path, png_uint_32 w, png_uint_32 h, png_uint_32 format,
               const std::vector<unsigned char>& data) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = w;
  img.height = h;
  img.format = format;
  REQUIRE(png_image_write_to_file(&img, path.c_str(), 0, data.data(), 0, nullptr));
}

} // namespace

TEST_CASE("binary PGM reading") {
  TempDir dir;
  write_bytes(dir / "a.pgm", std::string("P5\n# comment\n2 2\n255\n") + std::string("\x00\x80\xff\x40", 4));
  CHECK(load_image(dir / "a.pgm") == ImageGrid(2, 2, std::vector<double>{0, 128, 255, 64}));

  write_bytes(dir / "short.pgm", std::string("P5 2 2 255\n") + std::string("\x00\x80\xff", 3));
  CHECK_THROWS_AS(load_image(dir / "short.pgm"), FormatError);
  write_bytes(dir / "wide.pgm", std::string("P5 1 1 65535\n") + std::string("\x00\x01", 2));
  CHECK_THROWS_AS(load_image(dir / "wide.pgm"), FormatError);
  write_bytes(dir / "ascii.pgm", "P2 1 1 255\n7\n");
  CHECK_THROWS_AS(load_image(dir / "ascii.pgm"), FormatError);
  write_bytes(dir / "bad.pgm", "P5 x 1 255\n\x01");
  CHECK_THROWS_AS(load_image(dir / "bad.pgm"), FormatError);
  CHECK_THROWS_AS(load_image(dir / "missing.pgm"), FormatError);
}

TEST_CASE("save then load round-trips integer images") {
  TempDir dir;
  std::mt19937_64 rng(3);
  ImageGrid u = phantoms::random_grid(7, 11, rng, 0, 255);
  for (double& v : u.values()) v = std::round(v);
  for (const char* name : {"u.pgm", "u.png", "U.PNG"}) {
    save_image(u, dir / name);
    CHECK(load_image(dir / name) == u);
  }
  CHECK_THROWS_AS(save_image(u, dir / "u.bmp"), FormatError);
}

TEST_CASE("saving clamps and rounds") {
  TempDir dir;
  save_image(ImageGrid(1, 3, std::vector<double>{300.0, -5.0, 127.5}), dir / "c.pgm");
  CHECK(load_image(dir / "c.pgm") == ImageGrid(1, 3, std::vector<double>{255, 0, 128}));
  save_image(ImageGrid(2, 2, 127.5), dir / "c.png");
  CHECK(load_image(dir / "c.png") == ImageGrid(2, 2, 128.0));
}

TEST_CASE("colour PNGs are reduced to luminance, 16-bit PNGs are rejected") {
  TempDir dir;
  write_png(dir / "rgb.png", 2, 1, PNG_FORMAT_RGB, {255, 0, 0, 10, 20, 30});
  const ImageGrid g = load_image(dir / "rgb.png");
  CHECK(g(0, 0) == doctest::Approx(0.299 * 255));
  CHECK(g(0, 1) == doctest::Approx(0.299 * 10 + 0.587 * 20 + 0.114 * 30));

  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = 1;
  img.height = 1;
  img.format = PNG_FORMAT_LINEAR_Y;
  const png_uint_16 px = 1000;
  REQUIRE(png_image_write_to_file(&img, (dir / "deep.png").c_str(), 0, &px, 0, nullptr));
  CHECK_THROWS_AS(load_image(dir / "deep.png"), FormatError);
}

TEST_CASE("trace CSV") {
  TempDir dir;
  write_trace({}, dir / "empty.csv");
  CHECK(read_file(dir / "empty.csv") == "stage,sigma,iter,rel_err,residual,psnr,ssim\n");

  const std::vector<TraceRow> one = {TraceRow{1, 1, 1, 0.5, 10.0, std::nullopt, std::nullopt}};
  write_trace(one, dir / "one.csv");
  CHECK(read_file(dir / "one.csv") == "stage,sigma,iter,rel_err,residual,psnr,ssim\n1,1,1,0.5,10,,\n");

  const std::vector<TraceRow> rows = {
      TraceRow{1, 1, 1, 0.123456789, 1234.56789, 27.123456789, 0.812345678},
      TraceRow{1, 1, 2, 1.5e-9, 3.0, 28.0, std::nullopt},
      TraceRow{2, 2, 1, 2.0 / 3.0, 1e-300, std::nullopt, 0.5}};
  write_trace(rows, dir / "rows.csv");
  const auto back = read_trace(dir / "rows.csv");
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].stage == rows[i].stage);
    CHECK(back[i].sigma == rows[i].sigma);
    CHECK(back[i].iter == rows[i].iter);
    CHECK(back[i].rel_err == doctest::Approx(rows[i].rel_err).epsilon(1e-8));
    CHECK(back[i].residual == doctest::Approx(rows[i].residual).epsilon(1e-8));
    CHECK(back[i].psnr.has_value() == rows[i].psnr.has_value());
    CHECK(back[i].ssim.has_value() == rows[i].ssim.has_value());
    if (rows[i].psnr) CHECK(*back[i].psnr == doctest::Approx(*rows[i].psnr).epsilon(1e-8));
  }
  write_bytes(dir / "junk.csv", "a,b\n");
  CHECK_THROWS_AS(read_trace(dir / "junk.csv"), FormatError);
}

TEST_CASE("cli metrics and usage errors") {
  TempDir dir;
  save_image(phantoms::mixed(32), dir / "u.png");
  const Run same = cli({"metrics", "--a", dir / "u.png", "--b", dir / "u.png"});
  REQUIRE(same.code == 0);
  const auto j = nlohmann::json::parse(same.out);
  CHECK(j["psnr"] == "inf");
  CHECK(j["ssim"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(j["fom"].get<double>() == 1.0);

  CHECK(cli({}).code == 1);
  CHECK(cli({"denoise"}).code == 1);
  CHECK(cli({"metrics", "--a", dir / "u.png", "--b", dir / "u.png", "--bogus"}).code == 1);
  CHECK(cli({"restore", "--in", dir / "u.png", "--out", dir / "o.png", "--method", "tv"}).code == 1);
  CHECK(cli({"metrics", "--a", dir / "u.png", "--b", dir / "nothing.png"}).code == 1);
  CHECK(cli({"restore", "--in", dir / "u.png", "--out", dir / "o.png", "--penalty", "0"}).code == 1);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("cli degrade writes a replayable sidecar") {
  TempDir dir;
  const ImageGrid u = phantoms::quadratic(32);
  save_image(u, dir / "u.png");
  REQUIRE(cli({"degrade", "--in", dir / "u.png", "--out", dir / "same.png", "--noise-sigma", "0",
               "--seed", "1"}).code == 0);
  CHECK(load_image(dir / "same.png") == quantize_8bit(u));

  REQUIRE(cli({"degrade", "--in", dir / "u.png", "--out", dir / "f.pgm", "--noise-sigma", "20",
               "--blur-size", "3", "--blur-sigma", "0.5", "--seed", "42"}).code == 0);
  const auto side = nlohmann::json::parse(read_file(dir / "f.pgm.json"));
  CHECK(side["noise_sigma"].get<double>() == 20.0);
  CHECK(side["blur_sigma"].get<double>() == 0.5);
  CHECK(side["kernel_size"].get<int>() == 3);
  CHECK(side["seed"].get<std::uint64_t>() == 42);
  CHECK(side["noise_scheme"] == kNoiseScheme);

  DegradeSpec spec;
  spec.kernel_size = side["kernel_size"].get<std::size_t>();
  spec.blur_sigma = side["blur_sigma"].get<double>();
  spec.noise_sigma = side["noise_sigma"].get<double>();
  spec.seed = side["seed"].get<std::uint64_t>();
  CHECK(quantize_8bit(degrade(load_image(side["input"].get<std::string>()), spec)) ==
        load_image(dir / "f.pgm"));
}

TEST_CASE("cli restore") {
  TempDir dir;
  const ImageGrid u = phantoms::mixed(32);
  save_image(u, dir / "u.png");
  REQUIRE(cli({"degrade", "--in", dir / "u.png", "--out", dir / "f.png", "--noise-sigma", "20",
               "--seed", "5"}).code == 0);

  const std::vector<std::string> args = {"restore", "--in", dir / "f.png", "--out", dir / "s.png",
                                         "--method", "stagewise", "--oracle", dir / "u.png",
                                         "--trace", dir / "t.csv"};
  const Run r = cli(args);
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  for (const char* key : {"method", "psnr", "ssim", "fom", "stages", "total_iters", "termination"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["method"] == "stagewise");
  CHECK(j["psnr"].get<double>() == doctest::Approx(psnr(load_image(dir / "s.png"), load_image(dir / "u.png"))).epsilon(1e-12));

  const auto rows = read_trace(dir / "t.csv");
  std::map<std::size_t, double> best;
  for (const auto& row : rows) {
    REQUIRE(row.psnr.has_value());
    REQUIRE(row.ssim.has_value());
    auto [it, fresh] = best.emplace(row.stage, *row.psnr);
    if (!fresh) it->second = std::max(it->second, *row.psnr);
  }
  double prev = -1.0;
  for (const auto& [stage, value] : best) {
    CHECK(value >= prev);
    prev = value;
  }

  const std::string first = read_file(dir / "s.png");
  const std::string trace = read_file(dir / "t.csv");
  REQUIRE(cli(args).code == 0);
  CHECK(read_file(dir / "s.png") == first);
  CHECK(read_file(dir / "t.csv") == trace);

  const Run blind = cli({"restore", "--in", dir / "f.png", "--out", dir / "b.png"});
  REQUIRE(blind.code == 0);
  CHECK(nlohmann::json::parse(blind.out)["psnr"].is_null());
}

TEST_CASE("cli: one blind stage reproduces the plain ROF output") {
  TempDir dir;
  save_image(phantoms::piecewise_constant(32), dir / "u.png");
  REQUIRE(cli({"degrade", "--in", dir / "u.png", "--out", dir / "f.png", "--noise-sigma", "10",
               "--blur-sigma", "0.5", "--seed", "9"}).code == 0);
  REQUIRE(cli({"restore", "--in", dir / "f.png", "--out", dir / "rof.png", "--method", "rof",
               "--blur-sigma", "0.5", "--max-inner", "50"}).code == 0);
  const Run one = cli({"restore", "--in", dir / "f.png", "--out", dir / "one.png", "--method",
                       "stagewise", "--n-max", "1", "--blur-sigma", "0.5", "--max-inner", "50"});
  REQUIRE(one.code == 0);
  CHECK(nlohmann::json::parse(one.out)["stages"] == 1);
  CHECK(read_file(dir / "rof.png") == read_file(dir / "one.png"));
}
