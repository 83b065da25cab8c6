#include "commands.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>

#include "drivestat/analysis.hpp"
#include "drivestat/bivariate.hpp"
#include "drivestat/convergence.hpp"
#include "drivestat/error.hpp"
#include "drivestat/fitselect.hpp"
#include "drivestat/format.hpp"
#include "drivestat/io.hpp"
#include "drivestat/levelset.hpp"
#include "drivestat/log.hpp"
#include "drivestat/synth.hpp"
#include "serialize.hpp"

namespace drivestat::cli {
namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Manifest plus analytic payload. Timestamps live only in the manifest so
// payloads of equal runs compare byte for byte.
class Document {
 public:
  Document(std::string command, Json config) : started_(utc_now()) {
    manifest_["command"] = std::move(command);
    manifest_["config"] = std::move(config);
    manifest_["inputs"] = Json::array();
    manifest_["seed"] = nullptr;
    manifest_["tool_version"] = std::string(kToolVersion);
  }

  void add_input(const std::filesystem::path& path, std::size_t records) {
    manifest_["inputs"].push_back(Json{{"path", path.string()}, {"sha256", sha256_file(path)}, {"records", records}});
  }
  void set_seed(std::uint64_t seed) { manifest_["seed"] = seed; }
  Json& payload() { return payload_; }

  [[nodiscard]] std::string render() const {
    Json m = manifest_;
    m["started_utc"] = started_;
    m["finished_utc"] = utc_now();
    Json doc{{"schema", std::string(kSchema)}, {"manifest", m}, {"payload", payload_}};
    return doc.dump(2) + "\n";
  }
  [[nodiscard]] std::string render_payload() const { return payload_.dump(2) + "\n"; }

 private:
  std::string started_;
  Json manifest_ = Json::object();
  Json payload_ = Json::object();
};

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-")
    out << text;
  else
    write_file_atomic(path, text);
}

std::vector<double> parse_list(const std::string& text, std::string_view what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && item[used] == ' ') ++used;
    if (used == 0 || used != item.size()) throw ParameterError(std::string(what) + ": cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ParameterError(std::string(what) + ": empty list");
  return out;
}

Axis parse_axis(const std::string& name) {
  if (name == "ax") return Axis::ax;
  if (name == "ay") return Axis::ay;
  return Axis::vx;
}

Section parse_section(const std::string& name) {
  if (name == "brake") return Section::brake;
  if (name == "forward") return Section::forward;
  if (name == "left") return Section::left;
  return Section::right;
}

double max_abs(const PointSet& samples, std::size_t axis) {
  double m = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) m = std::max(m, std::fabs(samples.at(i, axis)));
  return m;
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
  std::size_t n = 0;
  std::uint64_t seed = 1;
  std::string out = "-";
  std::string config;
  std::string params = "reference";
  std::optional<double> coupling, hump, hump_center, hump_width;
};

GpdParams gpd_from_json(const Json& j) { return {j.at("k").get<double>(), j.at("sigma").get<double>()}; }

SynthConfig load_synth_config(const SynthOptions& o) {
  SynthConfig cfg;
  std::string params = o.params;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw DataError("cannot open config " + o.config);
    Json j;
    try {
      j = Json::parse(in);
      if (j.contains("params")) {
        const Json& p = j["params"];
        if (p.is_string()) {
          params = p.get<std::string>();
        } else {
          cfg.base.brake = gpd_from_json(p.at("brake"));
          cfg.base.forward = gpd_from_json(p.at("forward"));
          cfg.base.left = gpd_from_json(p.at("left"));
          cfg.base.right = gpd_from_json(p.at("right"));
          if (p.contains("weights")) cfg.base.weights = p["weights"].get<std::array<double, 4>>();
          params.clear();
        }
      }
      cfg.coupling = j.value("coupling", cfg.coupling);
      cfg.hump = j.value("hump", cfg.hump);
      cfg.hump_center = j.value("hump_center", cfg.hump_center);
      cfg.hump_width = j.value("hump_width", cfg.hump_width);
      if (j.contains("velocity_weights")) cfg.velocity_weights = j["velocity_weights"].get<std::array<double, 3>>();
      cfg.near_zero_scale = j.value("near_zero_scale", cfg.near_zero_scale);
      cfg.plateau_end = j.value("plateau_end", cfg.plateau_end);
      cfg.taper_end = j.value("taper_end", cfg.taper_end);
      cfg.sample_rate = j.value("sample_rate", cfg.sample_rate);
    } catch (const Json::exception& e) {
      throw DataError("config " + o.config + ": " + e.what());
    }
  }
  if (params == "reference")
    cfg.base = BpdmParams::reference();
  else if (params == "fitted")
    cfg.base = BpdmParams::fitted_sections();
  else if (!params.empty())
    throw ParameterError("unknown parameter set '" + params + "'");
  if (o.coupling) cfg.coupling = *o.coupling;
  if (o.hump) cfg.hump = *o.hump;
  if (o.hump_center) cfg.hump_center = *o.hump_center;
  if (o.hump_width) cfg.hump_width = *o.hump_width;
  cfg.seed = o.seed;
  validate(cfg);
  return cfg;
}

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  const SynthConfig cfg = load_synth_config(o);
  SynthGenerator gen(cfg);
  std::ostringstream csv;
  std::vector<TripRecord> batch;
  batch.reserve(4096);
  csv << "t,ax,ay,vx\n";
  for (std::size_t done = 0; done < o.n;) {
    batch.clear();
    const std::size_t take = std::min<std::size_t>(4096, o.n - done);
    for (std::size_t i = 0; i < take; ++i) batch.push_back(gen.next());
    for (const auto& r : batch)
      csv << format_g9(r.t) << ',' << format_g9(r.ax) << ',' << format_g9(r.ay) << ',' << format_g9(r.vx) << '\n';
    done += take;
  }
  emit(o.out, csv.str(), out);
  return kOk;
}

// ---------------------------------------------------------------- converge

struct ConvergeOptions {
  std::string input;
  std::string out = "-";
  std::string trace;
  std::string signal = "axy";
  std::string bandwidth = "reselect";
  std::size_t chunk = 10'000;
  double epsilon = 1e-4;
  std::size_t window = 20;
  std::size_t max_chunks = 0;
  std::size_t nodes = 0;
  std::optional<std::uint64_t> shuffle_seed;
};

PointSet signal_points(const TripData& data, const std::string& signal) {
  if (signal == "axy") return data.accelerations();
  if (signal == "ax") return PointSet::univariate(data.ax);
  if (signal == "ay") return PointSet::univariate(data.ay);
  if (!data.has_vx) throw DataError("signal vx requested but the input has no vx column");
  return PointSet::univariate(data.vx);
}

ConvergenceConfig convergence_config(const ConvergeOptions& o) {
  ConvergenceConfig cfg;
  cfg.chunk_size = o.chunk;
  cfg.epsilon = o.epsilon;
  cfg.window = o.window;
  cfg.max_chunks = o.max_chunks;
  cfg.nodes_per_axis = o.nodes;
  cfg.bandwidth_policy = o.bandwidth == "freeze" ? BandwidthPolicy::freeze : BandwidthPolicy::reselect;
  validate(cfg);
  return cfg;
}

Json converge_config_json(const ConvergeOptions& o) {
  return Json{{"signal", o.signal},     {"chunk", o.chunk},           {"epsilon", o.epsilon},
              {"window", o.window},     {"bandwidth", o.bandwidth},   {"max_chunks", o.max_chunks},
              {"nodes", o.nodes},       {"shuffle_seed", o.shuffle_seed ? Json(*o.shuffle_seed) : Json(nullptr)}};
}

int cmd_converge(const ConvergeOptions& o, std::ostream& out) {
  const ConvergenceConfig cfg = convergence_config(o);
  const TripData data = read_trips_csv(std::filesystem::path(o.input));
  Document doc("converge", converge_config_json(o));
  doc.add_input(o.input, data.size());
  if (o.shuffle_seed) doc.set_seed(*o.shuffle_seed);
  PointSetStream stream(signal_points(data, o.signal), o.shuffle_seed);
  const ConvergenceResult result = examine_convergence(stream, cfg);
  doc.payload() = Json{{"signal", o.signal}, {"convergence", to_json(result)}};
  if (!o.trace.empty()) {
    std::ostringstream csv;
    write_trace_csv(csv, result);
    write_file_atomic(o.trace, csv.str());
  }
  emit(o.out, doc.render(), out);
  return result.status == ConvergenceStatus::converged ? kOk : kAnalyticFailure;
}

// ---------------------------------------------------------------- fit

struct FitOptions {
  std::string input;
  std::string out = "-";
  std::string section = "left";
};

int cmd_fit(const FitOptions& o, std::ostream& out) {
  const TripData data = read_trips_csv(std::filesystem::path(o.input));
  Document doc("fit", Json{{"section", o.section}});
  doc.add_input(o.input, data.size());
  const QuadrantDataset q = decompose_quadrants(data.accelerations());
  const std::vector<double> mags = o.section == "lateral" ? q.lateral() : q.section(parse_section(o.section));
  const ModelRanking ranking = rank_models(mags);
  doc.payload() = Json{{"section", o.section}, {"n", mags.size()}, {"ranking", to_json(ranking)}};
  emit(o.out, doc.render(), out);
  return ranking.by_aic.empty() ? kAnalyticFailure : kOk;
}

// ---------------------------------------------------------------- contour

struct ContourOptions {
  std::string input;
  std::string model;
  std::string params = "reference";
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  std::string levels;
  std::string out_format = "json";
  std::string out = "-";
  std::size_t nodes = 0;
  double tolerance = 0.01;
};

std::vector<double> relative_levels(const std::string& text) {
  return text.empty() ? kRelativeContourLevels : parse_list(text, "levels");
}

struct LevelContours {
  double relative = 0.0;
  std::vector<Polyline> polylines;
};

std::string contours_csv(const std::vector<LevelContours>& levels) {
  std::ostringstream csv;
  csv << "relative_level,x,y\n";
  bool first = true;
  for (const auto& lvl : levels)
    for (const auto& line : lvl.polylines) {
      if (!first) csv << '\n';
      first = false;
      auto row = [&](const Point2& p) {
        csv << format_g9(lvl.relative) << ',' << format_g9(p[0]) << ',' << format_g9(p[1]) << '\n';
      };
      for (const auto& p : line.points) row(p);
      if (line.closed && !line.points.empty()) row(line.points.front());
    }
  return csv.str();
}

std::string contours_svg(const std::vector<LevelContours>& levels) {
  std::vector<Polyline> all;
  for (const auto& lvl : levels) all.insert(all.end(), lvl.polylines.begin(), lvl.polylines.end());
  std::ostringstream svg;
  write_polylines_svg(svg, all);
  return svg.str();
}

int cmd_contour(const ContourOptions& o, std::ostream& out) {
  if (o.input.empty() == o.model.empty()) throw ParameterError("contour: give exactly one of --input or --model");
  const std::vector<double> levels = relative_levels(o.levels);
  for (const double l : levels)
    if (!(l > 0.0 && l <= 1.0)) throw ParameterError("contour: relative levels must lie in (0, 1]");

  Json config{{"levels", levels}, {"out_format", o.out_format}, {"nodes", o.nodes}};
  std::vector<LevelContours> drawn;
  int code = kOk;
  Json payload;

  if (!o.input.empty()) {
    const TripData data = read_trips_csv(std::filesystem::path(o.input));
    Document doc("contour", config);
    doc.add_input(o.input, data.size());
    const RelativeContourReport report =
        relative_density_contours(data.accelerations(), levels, o.nodes == 0 ? kDefaultNodes2d : o.nodes);
    for (const auto& c : report.contours) drawn.push_back({c.relative_level, c.polylines});
    Json table = Json::array();
    for (const auto& c : report.contours)
      table.push_back(Json{{"density_contour", c.relative_level}, {"data_percentile", c.mass_inside}});
    doc.payload() = Json{{"mode", "empirical"}, {"table", table}, {"contours", to_json(report)}};
    payload = doc.payload();
    if (o.out_format == "json") {
      emit(o.out, doc.render(), out);
      return code;
    }
  } else {
    config["model"] = o.model;
    config["tolerance"] = o.tolerance;
    const std::size_t nodes = o.nodes == 0 ? kDefaultCheckNodes : o.nodes;
    std::function<ContourCheck(double)> check;
    double peak = 0.0;
    Json params;
    if (o.model == "bndm") {
      const BndmParams p{o.sigma_x, o.sigma_y};
      validate(p);
      peak = bndm_peak(p);
      params = Json{{"sigma_nx", p.sigma_nx}, {"sigma_ny", p.sigma_ny}};
      check = [p, nodes](double level) { return check_bndm_contour(level, p, nodes); };
    } else if (o.model == "bpdm") {
      BpdmParams p;
      if (o.params == "reference")
        p = BpdmParams::reference();
      else if (o.params == "fitted")
        p = BpdmParams::fitted_sections();
      else
        throw ParameterError("unknown parameter set '" + o.params + "'");
      peak = bpdm_peak(p);
      params = Json{{"set", o.params},
                    {"brake", to_json(p.brake)},
                    {"forward", to_json(p.forward)},
                    {"left", to_json(p.left)},
                    {"right", to_json(p.right)},
                    {"weights", p.weights}};
      check = [p, nodes](double level) { return check_bpdm_contour(level, p, nodes); };
    } else {
      throw ParameterError("unknown model '" + o.model + "'");
    }
    config["params"] = params;
    Json rows = Json::array();
    double worst = 0.0;
    for (const double rel : levels) {
      const double level = rel * peak;
      Json row{{"relative_level", rel}, {"absolute_level", level}};
      if (rel >= 1.0) {
        // The peak level set is a single point (or a corner); nothing to compare.
        row["analytic"] = Json::array();
        row["max_relative_deviation"] = nullptr;
      } else {
        const ContourCheck c = check(level);
        drawn.push_back({rel, c.analytic});
        Json polys = Json::array();
        for (const auto& line : c.analytic) polys.push_back(to_json(line));
        row["analytic"] = polys;
        row["max_deviation"] = c.max_deviation;
        row["bounding_box_diagonal"] = c.diagonal;
        row["max_relative_deviation"] = c.relative_deviation();
        worst = std::max(worst, c.relative_deviation());
      }
      rows.push_back(row);
    }
    const bool within = worst <= o.tolerance;
    payload = Json{{"mode", "model"},
                   {"model", o.model},
                   {"peak_density", peak},
                   {"levels", rows},
                   {"worst_relative_deviation", worst},
                   {"within_tolerance", within}};
    if (!within) code = kAnalyticFailure;
    if (o.out_format == "json") {
      Document doc("contour", config);
      doc.payload() = payload;
      emit(o.out, doc.render(), out);
      return code;
    }
  }
  emit(o.out, o.out_format == "svg" ? contours_svg(drawn) : contours_csv(drawn), out);
  return code;
}

// ---------------------------------------------------------------- percentiles / velocity

struct PercentileOptions {
  std::string input;
  std::string out = "-";
  std::string csv;
  std::string target = "ay";
  std::string condition = "ax";
  std::string bins;
  double bin_width = kAccelerationBinWidth;
  std::string levels;
  std::size_t min_count = kDefaultMinBinCount;
};

std::vector<double> percentile_levels(const std::string& text) {
  return text.empty() ? kDefaultPercentiles : parse_list(text, "levels");
}

PointSet percentile_samples(const TripData& data, Axis target, Axis condition) {
  return target == Axis::vx || condition == Axis::vx ? data.with_velocity() : data.accelerations();
}

PercentileTable run_percentiles(const PointSet& samples, Axis target, Axis condition, const std::string& bins,
                                double bin_width, const std::vector<double>& levels, std::size_t min_count) {
  const std::vector<double> edges = bins.empty()
                                        ? uniform_edges(0.0, bin_width, max_abs(samples, static_cast<std::size_t>(condition)))
                                        : parse_list(bins, "bins");
  return percentile_by_interval(samples, target, condition, edges, levels, min_count);
}

int cmd_percentiles(const PercentileOptions& o, std::ostream& out) {
  const std::vector<double> levels = percentile_levels(o.levels);
  const Axis target = parse_axis(o.target), condition = parse_axis(o.condition);
  if (target == condition) throw ParameterError("percentiles: target and condition must differ");
  const TripData data = read_trips_csv(std::filesystem::path(o.input));
  Document doc("percentiles", Json{{"target", o.target},
                                   {"condition", o.condition},
                                   {"bins", o.bins},
                                   {"bin_width", o.bin_width},
                                   {"levels", levels},
                                   {"min_count", o.min_count}});
  doc.add_input(o.input, data.size());
  const PercentileTable table = run_percentiles(percentile_samples(data, target, condition), target, condition,
                                                o.bins, o.bin_width, levels, o.min_count);
  doc.payload() = to_json(table);
  if (!o.csv.empty()) {
    std::ostringstream csv;
    write_percentile_csv(csv, table);
    write_file_atomic(o.csv, csv.str());
  }
  emit(o.out, doc.render(), out);
  return kOk;
}

struct VelocityOptions {
  std::string input;
  std::string out = "-";
  std::string bins;
  double bin_width = kVelocityBinWidth;
  std::string levels;
  std::size_t min_count = kDefaultMinBinCount;
};

VelocityProfileReport run_velocity(const PointSet& samples, const std::string& bins, double bin_width,
                                   const std::vector<double>& levels, std::size_t min_count) {
  const std::vector<double> edges =
      bins.empty() ? uniform_edges(0.0, bin_width, max_abs(samples, 2)) : parse_list(bins, "bins");
  return velocity_profile(samples, edges, levels, min_count);
}

int cmd_velocity(const VelocityOptions& o, std::ostream& out) {
  const std::vector<double> levels = percentile_levels(o.levels);
  const TripData data = read_trips_csv(std::filesystem::path(o.input));
  Document doc("velocity", Json{{"bins", o.bins}, {"bin_width", o.bin_width}, {"levels", levels}, {"min_count", o.min_count}});
  doc.add_input(o.input, data.size());
  doc.payload() = to_json(run_velocity(data.with_velocity(), o.bins, o.bin_width, levels, o.min_count));
  emit(o.out, doc.render(), out);
  return kOk;
}

// ---------------------------------------------------------------- report

struct ReportOptions {
  std::string input;
  std::string out_dir;
  std::size_t chunk = 10'000;
  double epsilon = 1e-4;
  std::size_t window = 20;
  std::size_t min_count = kDefaultMinBinCount;
};

int cmd_report(const ReportOptions& o, std::ostream& out, std::ostream& err) {
  ConvergeOptions conv;
  conv.chunk = o.chunk;
  conv.epsilon = o.epsilon;
  conv.window = o.window;
  const ConvergenceConfig cfg = convergence_config(conv);
  const TripData data = read_trips_csv(std::filesystem::path(o.input));
  std::filesystem::create_directories(o.out_dir);
  const std::filesystem::path dir(o.out_dir);

  Document doc("report", Json{{"convergence", converge_config_json(conv)},
                              {"contour_levels", kRelativeContourLevels},
                              {"percentile_levels", kDefaultPercentiles},
                              {"acceleration_bin_width", kAccelerationBinWidth},
                              {"velocity_bin_width", kVelocityBinWidth},
                              {"min_count", o.min_count}});
  doc.add_input(o.input, data.size());
  const PointSet acc = data.accelerations();
  bool all_ok = true;
  Json& payload = doc.payload();

  auto section = [&](const std::string& name, const std::function<Json()>& body, const std::function<bool(const Json&)>& ok) {
    Json s;
    try {
      s = body();
      s["ok"] = ok(s);
    } catch (const Error& e) {
      s = Json{{"ok", false}, {"error", e.what()}};
    }
    if (!s["ok"].get<bool>()) {
      all_ok = false;
      err << "report: section " << name << " did not succeed\n";
    }
    payload[name] = s;
  };
  auto always = [](const Json&) { return true; };

  section(
      "convergence",
      [&] {
        PointSetStream stream(acc);
        const ConvergenceResult r = examine_convergence(stream, cfg);
        std::ostringstream csv;
        write_trace_csv(csv, r);
        write_file_atomic(dir / "convergence_trace.csv", csv.str());
        return Json{{"signal", "axy"}, {"result", to_json(r)}};
      },
      [](const Json& s) { return s["result"]["status"] == "converged"; });

  section(
      "pattern",
      [&] {
        const RelativeContourReport r = relative_density_contours(acc, kRelativeContourLevels);
        std::vector<Polyline> all;
        Json table = Json::array();
        for (const auto& c : r.contours) {
          all.insert(all.end(), c.polylines.begin(), c.polylines.end());
          table.push_back(Json{{"density_contour", c.relative_level}, {"data_percentile", c.mass_inside}});
        }
        std::ostringstream svg;
        write_polylines_svg(svg, all);
        write_file_atomic(dir / "contours.svg", svg.str());
        return Json{{"table", table}, {"contours", to_json(r)}};
      },
      always);

  section(
      "fits",
      [&] {
        const QuadrantDataset q = decompose_quadrants(acc);
        Json sections = Json::object();
        for (const Section s : kSections) sections[std::string(to_string(s))] = to_json(rank_models(q.section(s)));
        sections["lateral"] = to_json(rank_models(q.lateral()));
        const auto edges = uniform_edges(0.0, kAccelerationBinWidth, max_abs(acc, 0));
        return Json{{"sections", sections},
                    {"lateral_by_longitudinal", to_json(conditional_fit_battery(acc, Axis::ax, Axis::ay, edges, o.min_count))}};
      },
      always);

  section(
      "percentiles",
      [&] {
        const PercentileTable ay_by_ax =
            run_percentiles(acc, Axis::ay, Axis::ax, "", kAccelerationBinWidth, kDefaultPercentiles, o.min_count);
        const PercentileTable ax_by_ay =
            run_percentiles(acc, Axis::ax, Axis::ay, "", kAccelerationBinWidth, kDefaultPercentiles, o.min_count);
        std::ostringstream a, b;
        write_percentile_csv(a, ay_by_ax);
        write_percentile_csv(b, ax_by_ay);
        write_file_atomic(dir / "percentiles_ay_by_ax.csv", a.str());
        write_file_atomic(dir / "percentiles_ax_by_ay.csv", b.str());
        return Json{{"ay_by_ax", to_json(ay_by_ax)}, {"ax_by_ay", to_json(ax_by_ay)}};
      },
      always);

  section(
      "velocity",
      [&] {
        return to_json(run_velocity(data.with_velocity(), "", kVelocityBinWidth, kDefaultPercentiles, o.min_count));
      },
      always);

  write_file_atomic(dir / "payload.json", doc.render_payload());
  write_file_atomic(dir / "report.json", doc.render());
  out << (dir / "report.json").string() << '\n';
  return all_ok ? kOk : kAnalyticFailure;
}

int exit_code_for(const Error& e) {
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const ParameterError*>(&e) ||
      dynamic_cast<const DomainError*>(&e))
    return kDataError;
  return kAnalyticFailure;
}

class SinkGuard {
 public:
  explicit SinkGuard(std::ostream& err)
      : previous_(set_warning_sink([&err](std::string_view m) { err << "warning: " << m << '\n'; })) {}
  ~SinkGuard() { set_warning_sink(std::move(previous_)); }
  SinkGuard(const SinkGuard&) = delete;
  SinkGuard& operator=(const SinkGuard&) = delete;

 private:
  WarningSink previous_;
};

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256: init failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  SinkGuard guard(err);
  CLI::App app{"Driver acceleration statistics", "drivestat"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  const std::vector<std::string> axes{"ax", "ay", "vx"};
  const std::vector<std::string> sections{"brake", "forward", "left", "right", "lateral"};

  SynthOptions synth;
  auto* s = app.add_subcommand("synth", "Generate synthetic trip records as CSV");
  s->add_option("--n", synth.n, "Number of records")->required()->check(CLI::PositiveNumber);
  s->add_option("--seed", synth.seed, "Random seed");
  s->add_option("--out", synth.out, "Output CSV path ('-' for stdout)");
  s->add_option("--config", synth.config, "JSON configuration file");
  s->add_option("--params", synth.params, "Base parameter set")->check(CLI::IsMember({"reference", "fitted"}));
  s->add_option("--coupling", synth.coupling, "Lateral coupling alpha")->check(CLI::NonNegativeNumber);
  s->add_option("--hump", synth.hump, "Velocity hump beta")->check(CLI::NonNegativeNumber);
  s->add_option("--hump-center", synth.hump_center, "Hump centre (m/s)");
  s->add_option("--hump-width", synth.hump_width, "Hump width (m/s)")->check(CLI::PositiveNumber);

  ConvergeOptions conv;
  auto* c = app.add_subcommand("converge", "Examine how much data the density estimate needs");
  c->add_option("--input", conv.input, "Trip CSV")->required();
  c->add_option("--out", conv.out, "Output JSON path");
  c->add_option("--trace", conv.trace, "Also write the KL trace as CSV");
  c->add_option("--signal", conv.signal, "Observation vector")->check(CLI::IsMember({"ax", "ay", "axy", "vx"}));
  c->add_option("--chunk", conv.chunk, "Chunk size m")->check(CLI::PositiveNumber);
  c->add_option("--epsilon", conv.epsilon, "KL threshold")->check(CLI::PositiveNumber);
  c->add_option("--window", conv.window, "Steps that must stay below epsilon")->check(CLI::PositiveNumber);
  c->add_option("--bandwidth", conv.bandwidth, "Bandwidth policy")->check(CLI::IsMember({"reselect", "freeze"}));
  c->add_option("--max-chunks", conv.max_chunks, "Stop after this many chunks (0: whole input)");
  c->add_option("--nodes", conv.nodes, "Grid nodes per axis (0: default)");
  c->add_option("--shuffle-seed", conv.shuffle_seed, "Shuffle records with this seed first");

  FitOptions fit;
  auto* f = app.add_subcommand("fit", "Fit and rank magnitude models for one section");
  f->add_option("--input", fit.input, "Trip CSV")->required();
  f->add_option("--out", fit.out, "Output JSON path");
  f->add_option("--section", fit.section, "Acceleration section")->check(CLI::IsMember(sections));

  ContourOptions contour;
  auto* k = app.add_subcommand("contour", "Relative density contours, empirical or from a model");
  k->add_option("--input", contour.input, "Trip CSV (empirical contours)");
  k->add_option("--model", contour.model, "Model contours")->check(CLI::IsMember({"bpdm", "bndm"}));
  k->add_option("--params", contour.params, "BPDM parameter set")->check(CLI::IsMember({"reference", "fitted"}));
  k->add_option("--sigma-x", contour.sigma_x, "BNDM sigma_x")->check(CLI::PositiveNumber);
  k->add_option("--sigma-y", contour.sigma_y, "BNDM sigma_y")->check(CLI::PositiveNumber);
  k->add_option("--levels", contour.levels, "Comma-separated fractions of the peak density");
  k->add_option("--out-format", contour.out_format, "Output format")->check(CLI::IsMember({"csv", "svg", "json"}));
  k->add_option("--out", contour.out, "Output path");
  k->add_option("--nodes", contour.nodes, "Grid nodes per axis (0: default)");
  k->add_option("--tolerance", contour.tolerance, "Allowed analytic-vs-numeric deviation (fraction of diagonal)");

  PercentileOptions pct;
  auto* p = app.add_subcommand("percentiles", "Percentiles of one magnitude within bins of another");
  p->add_option("--input", pct.input, "Trip CSV")->required();
  p->add_option("--out", pct.out, "Output JSON path");
  p->add_option("--csv", pct.csv, "Also write the table as CSV");
  p->add_option("--target", pct.target, "Target axis")->check(CLI::IsMember(axes));
  p->add_option("--condition", pct.condition, "Conditioning axis")->check(CLI::IsMember(axes));
  p->add_option("--bins", pct.bins, "Comma-separated bin edges");
  p->add_option("--bin-width", pct.bin_width, "Uniform bin width from 0")->check(CLI::PositiveNumber);
  p->add_option("--levels", pct.levels, "Comma-separated percentile levels");
  p->add_option("--min-count", pct.min_count, "Smallest bin that gets percentiles");

  VelocityOptions vel;
  auto* v = app.add_subcommand("velocity", "Acceleration profile per velocity bin");
  v->add_option("--input", vel.input, "Trip CSV with vx")->required();
  v->add_option("--out", vel.out, "Output JSON path");
  v->add_option("--bins", vel.bins, "Comma-separated velocity edges (m/s)");
  v->add_option("--bin-width", vel.bin_width, "Uniform bin width from 0 (m/s)")->check(CLI::PositiveNumber);
  v->add_option("--levels", vel.levels, "Comma-separated percentile levels");
  v->add_option("--min-count", vel.min_count, "Smallest bin that gets fits and percentiles");

  ReportOptions rep;
  auto* r = app.add_subcommand("report", "Run the whole pipeline into a report bundle");
  r->add_option("--input", rep.input, "Trip CSV")->required();
  r->add_option("--out-dir", rep.out_dir, "Bundle directory")->required();
  r->add_option("--chunk", rep.chunk, "Convergence chunk size")->check(CLI::PositiveNumber);
  r->add_option("--epsilon", rep.epsilon, "Convergence KL threshold")->check(CLI::PositiveNumber);
  r->add_option("--window", rep.window, "Convergence window")->check(CLI::PositiveNumber);
  r->add_option("--min-count", rep.min_count, "Smallest bin that gets fits and percentiles");

  std::vector<std::string> argv_store{"drivestat"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (s->parsed()) return cmd_synth(synth, out);
    if (c->parsed()) return cmd_converge(conv, out);
    if (f->parsed()) return cmd_fit(fit, out);
    if (k->parsed()) return cmd_contour(contour, out);
    if (p->parsed()) return cmd_percentiles(pct, out);
    if (v->parsed()) return cmd_velocity(vel, out);
    if (r->parsed()) return cmd_report(rep, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace drivestat::cli
