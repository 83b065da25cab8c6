#include "serialize.hpp"

#include <ostream>

#include "drivestat/format.hpp"

namespace drivestat::cli {
namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json optional_number(const std::optional<double>& v) { return v ? number(*v) : Json(nullptr); }

Json optional_list(const std::vector<std::optional<double>>& values) {
  Json out = Json::array();
  for (const auto& v : values) out.push_back(optional_number(v));
  return out;
}

Json models(const std::vector<Model>& order) {
  Json out = Json::array();
  for (const Model m : order) out.push_back(std::string(to_string(m)));
  return out;
}

}  // namespace

Json to_json(const GpdParams& p) { return Json{{"k", number(p.k)}, {"sigma", number(p.sigma)}}; }

Json to_json(const Theta& theta) {
  if (const auto* g = std::get_if<GpdParams>(&theta)) return to_json(*g);
  if (const auto* n = std::get_if<NormalParams>(&theta)) return Json{{"mu", number(n->mu)}, {"sigma", number(n->sigma)}};
  return Json{{"mu", number(std::get<ExpParams>(theta).mu)}};
}

Json to_json(const FitReport& f) {
  Json j{{"model", std::string(to_string(f.model))}, {"ok", f.ok}};
  if (f.ok) {
    j["theta"] = to_json(f.theta);
    j["logL"] = number(f.logL);
    j["r"] = f.r;
    j["n"] = f.n;
    j["aic"] = number(f.aic);
    j["bic"] = number(f.bic);
  }
  if (!f.diagnostic.empty()) j["diagnostic"] = f.diagnostic;
  return j;
}

Json to_json(const ModelRanking& r) {
  Json fits = Json::array();
  for (const auto& f : r.fits) fits.push_back(to_json(f));
  return Json{{"fits", fits}, {"by_aic", models(r.by_aic)}, {"by_bic", models(r.by_bic)}, {"flags", r.flags}};
}

Json to_json(const ConvergenceResult& r) {
  Json trace = Json::array();
  for (const auto& s : r.trace) trace.push_back(Json{{"step", s.step}, {"n", s.n}, {"kl", number(s.kl)}});
  Json j{{"status", std::string(to_string(r.status))},
         {"gamma", r.gamma ? Json(*r.gamma) : Json(nullptr)},
         {"trace", trace}};
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  return j;
}

Json to_json(const Polyline& p) {
  Json pts = Json::array();
  for (const auto& q : p.points) pts.push_back(Json::array({number(q[0]), number(q[1])}));
  return Json{{"closed", p.closed}, {"points", pts}};
}

Json to_json(const RelativeContourReport& r) {
  Json levels = Json::array();
  for (const auto& c : r.contours) {
    Json polys = Json::array();
    for (const auto& p : c.polylines) polys.push_back(to_json(p));
    levels.push_back(Json{{"relative_level", number(c.relative_level)},
                          {"absolute_level", number(c.absolute_level)},
                          {"mass_inside", number(c.mass_inside)},
                          {"polylines", polys}});
  }
  Json h = Json::array();
  for (std::size_t a = 0; a < r.bandwidth.dim(); ++a) h.push_back(number(r.bandwidth.bandwidth(a)));
  return Json{{"peak_density", number(r.peak_density)}, {"bandwidth", h}, {"levels", levels}};
}

Json to_json(const PercentileTable& t) {
  Json rows = Json::array();
  for (const auto& row : t.rows)
    rows.push_back(Json{{"bin_low", number(row.lo)},
                        {"bin_high", number(row.hi)},
                        {"count", row.count},
                        {"present", row.present()},
                        {"values", optional_list(row.values)}});
  return Json{{"target", std::string(to_string(t.target))},
              {"condition", std::string(to_string(t.condition))},
              {"levels", t.levels},
              {"rows", rows}};
}

Json to_json(const VelocityProfileReport& r) {
  Json bins = Json::array();
  for (const auto& b : r.bins) {
    Json sections = Json::object();
    for (const Section s : kSections) {
      const auto& prof = b.sections[static_cast<int>(s)];
      Json j{{"count", prof.count},
             {"gpd", prof.fit ? to_json(*prof.fit) : Json(nullptr)},
             {"percentiles", optional_list(prof.percentiles)}};
      if (!prof.diagnostic.empty()) j["diagnostic"] = prof.diagnostic;
      sections[std::string(to_string(s))] = j;
    }
    bins.push_back(Json{{"bin_low", number(b.lo)}, {"bin_high", number(b.hi)}, {"count", b.count}, {"sections", sections}});
  }
  Json density{{"v", r.velocity_density.axis(0)}, {"pdf", r.velocity_density.values()}};
  return Json{{"levels", r.levels}, {"bins", bins}, {"velocity_density", density}};
}

Json to_json(const std::vector<BinFit>& fits) {
  Json out = Json::array();
  for (const auto& f : fits)
    out.push_back(Json{{"bin_low", number(f.lo)},
                       {"bin_high", number(f.hi)},
                       {"count", f.count},
                       {"ranking", f.ranking ? to_json(*f.ranking) : Json(nullptr)}});
  return out;
}

std::string percentile_label(double level) {
  std::string s = format_g9(level);
  std::erase(s, '.');
  return "p" + s;
}

void write_percentile_csv(std::ostream& out, const PercentileTable& t) {
  out << "bin_low,bin_high,count";
  for (const double l : t.levels) out << ',' << percentile_label(l);
  out << '\n';
  for (const auto& row : t.rows) {
    out << format_g9(row.lo) << ',' << format_g9(row.hi) << ',' << row.count;
    for (const auto& v : row.values) {
      out << ',';
      if (v) out << format_g9(*v);
    }
    out << '\n';
  }
}

}  // namespace drivestat::cli
