#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "specshift/serialize.hpp"
#include "specshift/shift.hpp"

using namespace specshift;

TEST_CASE("canonical json sorts keys and pins float text") {
  Json j;
  j["b"] = 1.5;
  j["a"] = Json::array({1, 2});
  CHECK(canonical_json(j) == "{\"a\":[1,2],\"b\":1.5}\n");
  Json f;
  f["x"] = 0.1;
  CHECK(canonical_json(f) == "{\"x\":0.10000000000000001}\n");
}

TEST_CASE("canonical json rejects non finite numbers") {
  Json j;
  j["x"] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(canonical_json(j), DomainError);
}

TEST_CASE("matrices round trip through json") {
  ComplexMatrix m(2, 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      m(i, j) = Complex(i + 0.5, j - 1.25);
  const Json j = matrix_to_json(m);
  const ComplexMatrix back = matrix_from_json(j, "test");
  REQUIRE(back.rows() == 2);
  REQUIRE(back.cols() == 3);
  CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("matrix parsing reports the offending location") {
  Json j{{"rows", 2}, {"cols", 2}, {"entries", Json::array({1, 2, 3})}};
  CHECK_THROWS_AS(matrix_from_json(j, "spec.h0"), ParseError);
}

TEST_CASE("shift function csv uses the documented layout") {
  ComplexMatrix z(1, 1), o(1, 1);
  z(0, 0) = 0.0;
  o(0, 0) = 1.0;
  const ShiftResult r =
      shift_function(HermitianOperator(z), HermitianOperator(o));
  CHECK(step_function_to_csv(r.xi) ==
        "breakpoint,value\n-inf,0\n0,1\n1,0\n");
}

TEST_CASE("atomic text write leaves no temporary behind") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "specshift_test_io";
  fs::create_directories(dir);
  const fs::path target = dir / "out.txt";
  write_text_atomic(target, "payload\n");
  std::ifstream in(target);
  std::string line;
  std::getline(in, line);
  CHECK(line == "payload");
  int entries = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);
  fs::remove_all(dir);
}

TEST_CASE("json loader reports parse failures with the filename") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "specshift_test_io2";
  fs::create_directories(dir);
  const fs::path bad = dir / "bad.json";
  {
    std::ofstream out(bad);
    out << "{ not json";
  }
  try {
    load_json_file(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("bad.json") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("complex numbers serialize as two element arrays") {
  const Json j = complex_to_json({1.25, -2.0});
  REQUIRE(j.is_array());
  CHECK(j[0].get<double>() == 1.25);
  CHECK(j[1].get<double>() == -2.0);
  const Complex back = complex_from_json(j, "test");
  CHECK(back == Complex(1.25, -2.0));
}
