#include <doctest.h>

#include <sstream>

#include "drivestat/error.hpp"
#include "drivestat/format.hpp"
#include "drivestat/io.hpp"
#include "drivestat/log.hpp"

using namespace drivestat;

TEST_CASE("nine-digit formatting") {
  CHECK(format_g9(0.1) == "0.1");
  CHECK(format_g9(1.0 / 3.0) == "0.333333333");
  CHECK(format_g9(-0.0) == "0");
  CHECK(format_g9(1234567890123.0) == "1.23456789e+12");
}

TEST_CASE("csv round trip at nine significant digits") {
  const auto records = synth_generate(SynthConfig{}, 200);
  std::stringstream io;
  write_trips_csv(io, records);
  const TripData d = read_trips_csv(io);
  REQUIRE(d.size() == records.size());
  CHECK(d.has_vx);
  for (std::size_t i = 0; i < records.size(); ++i) {
    REQUIRE(format_g9(d.t[i]) == format_g9(records[i].t));
    REQUIRE(format_g9(d.ax[i]) == format_g9(records[i].ax));
    REQUIRE(format_g9(d.ay[i]) == format_g9(records[i].ay));
    REQUIRE(format_g9(d.vx[i]) == format_g9(records[i].vx));
  }
}

TEST_CASE("vx is optional") {
  std::istringstream in("t,ax,ay\n0,1,2\n0.1,-1,0.5\n");
  const TripData d = read_trips_csv(in);
  CHECK_FALSE(d.has_vx);
  CHECK(d.size() == 2);
  CHECK(d.accelerations().coords == std::vector<double>{1, 2, -1, 0.5});
  CHECK_THROWS_AS(static_cast<void>(d.with_velocity()), DataError);
}

TEST_CASE("columns may come in any order and extras are ignored with a warning") {
  std::vector<std::string> warnings;
  auto previous = set_warning_sink([&](std::string_view m) { warnings.emplace_back(m); });
  std::istringstream in("ay,driver,t,vx,ax\r\n2,7,0,3,1\r\n");
  const TripData d = read_trips_csv(in);
  set_warning_sink(previous);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("driver") != std::string::npos);
  CHECK(d.ax[0] == 1.0);
  CHECK(d.ay[0] == 2.0);
  CHECK(d.vx[0] == 3.0);
}

TEST_CASE("malformed input names the line") {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_trips_csv(in);
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message("t,ax,ay,vx\n0,1,2,3\n0.1,abc,2,3\n").find("line 3") != std::string::npos);
  CHECK(message("t,ax,ay,vx\n0,1,2,3\n0.1,1,2\n").find("line 3") != std::string::npos);
  CHECK(message("t,ax,ay,vx\n0,1,2,-3\n").find("line 2") != std::string::npos);
  CHECK(message("t,ax,ay,vx\n0,nan,2,3\n").find("line 2") != std::string::npos);
  CHECK(message("t,ax,vx\n0,1,2\n").find("ay") != std::string::npos);
  CHECK(message("").find("header") != std::string::npos);
  CHECK(message("t,ax,ay\n").find("no records") != std::string::npos);
}
