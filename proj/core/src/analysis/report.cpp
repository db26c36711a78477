#include "fibersense/analysis/report.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "fibersense/core/error.hpp"

namespace fibersense::analysis {

using nlohmann::json;

namespace {

double interval_distance(double x, double lo, double hi) {
  if (x < lo) return lo - x;
  if (x > hi) return x - hi;
  return 0.0;
}

json tone_json(const ToneDetection& t) {
  json j{{"freq_hz", t.freq_hz},
         {"begin", core::format_utc(t.begin)},
         {"end", core::format_utc(t.end)},
         {"prominence_db", t.prominence_db}};
  j["position_m"] = t.position_m ? json(*t.position_m) : json(nullptr);
  return j;
}

std::string tone_text(const ToneDetection& t) {
  std::string s = fmt::format("{:.3f} Hz, {:.1f} dB over floor, {} .. {}", t.freq_hz, t.prominence_db,
                              core::format_utc(t.begin), core::format_utc(t.end));
  if (t.position_m) s += fmt::format(", at {:.2f} km", *t.position_m / 1000.0);
  return s;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

CrossModalReport build_report(const ReportInputs& in) {
  if (!in.das && !in.botdr && !in.sop) throw InvalidArgument("build_report: no modality present");
  CrossModalReport r;
  r.scenario = in.scenario;
  r.das_present = in.das.has_value();
  r.botdr_present = in.botdr.has_value();
  r.sop_present = in.sop.has_value();
  r.method = in.options.method;

  if (in.das && in.botdr && !grids_consistent(in.das->std_nstrain.position, in.botdr->delta_ue.position)) {
    throw InvalidArgument(fmt::format(
        "build_report: DAS grid (origin {} m, spacing {} m) and BOTDR grid (origin {} m, spacing {} m) are "
        "inconsistent",
        in.das->std_nstrain.position.start_m, in.das->std_nstrain.position.spacing_m,
        in.botdr->delta_ue.position.start_m, in.botdr->delta_ue.position.spacing_m));
  }

  std::vector<HotSpan> spans;
  if (in.das) {
    const auto& d = *in.das;
    if (d.wind) {
      for (const auto& seg : d.segments) {
        const double lo = std::max(seg.start_m, d.std_nstrain.position.start_m);
        const double hi = std::min(seg.end_m, d.std_nstrain.position.end_m());
        if (lo > hi) {
          r.notes.push_back(fmt::format("segment '{}' lies outside the DAS range; no correlation", seg.name));
          continue;
        }
        r.correlations.push_back({seg, correlate_wind_activity(*d.wind, d.std_nstrain, lo, hi, in.options.method)});
      }
    }
    spans = hot_spans(d.std_nstrain, in.options.hot_fraction);
    r.das_tones = d.tones;
  } else {
    r.notes.push_back("DAS: absent");
  }

  if (in.botdr) {
    r.colocation_tolerance_m = in.botdr->resolution_m;
    const double tol = r.colocation_tolerance_m;
    for (const auto& p : strain_peaks(in.botdr->delta_ue, in.options.peak_threshold_ue)) {
      PeakColocation c;
      c.peak = p;
      if (in.das) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < spans.size(); ++k) {
          const double dist = interval_distance(p.position_m, spans[k].start_m, spans[k].end_m);
          if (dist < best) {
            best = dist;
            c.hot_span = k;
          }
        }
        c.distance_m = std::isfinite(best) ? best : 0.0;
        c.colocated = c.hot_span.has_value() && best <= tol;
        const auto& pos = in.das->std_nstrain.position;
        if (p.position_m < pos.start_m - tol || p.position_m > pos.end_m() + tol) {
          r.notes.push_back(fmt::format("strain peak at {:.2f} km is outside the DAS range", p.position_m / 1000.0));
        }
      }
      r.strain_peaks.push_back(c);
    }
  } else {
    r.notes.push_back("BOTDR: absent");
  }

  for (const auto& s : spans) {
    HotSpanStatus st{s, false};
    if (in.botdr) {
      for (const auto& c : r.strain_peaks) {
        if (interval_distance(c.peak.position_m, s.start_m, s.end_m) <= r.colocation_tolerance_m) {
          st.static_feature = true;
        }
      }
      if (!st.static_feature) {
        r.notes.push_back(fmt::format("DAS hot span {:.2f}-{:.2f} km has no colocated static strain change",
                                      s.start_m / 1000.0, s.end_m / 1000.0));
      }
    }
    r.hot_spans.push_back(st);
  }

  if (in.sop) {
    r.sop_tones = in.sop->tones;
    r.sop_storm_fluctuation = in.sop->storm_fluctuation;
    r.sop_calm_fluctuation = in.sop->calm_fluctuation;
  } else {
    r.notes.push_back("SOP: absent");
  }
  return r;
}

json CrossModalReport::to_json() const {
  json j;
  j["schema"] = "rpt1";
  j["scenario"] = scenario;
  j["modalities"] = {{"das", das_present}, {"botdr", botdr_present}, {"sop", sop_present}};
  j["correlation_method"] = std::string(to_string(method));
  j["colocation_tolerance_m"] = colocation_tolerance_m;
  j["correlations"] = json::array();
  for (const auto& c : correlations) {
    j["correlations"].push_back(
        {{"segment", c.segment.name}, {"start_m", c.segment.start_m}, {"end_m", c.segment.end_m}, {"r", c.r}});
  }
  j["das_hot_spans"] = json::array();
  for (const auto& h : hot_spans) {
    j["das_hot_spans"].push_back({{"start_m", h.span.start_m},
                                  {"end_m", h.span.end_m},
                                  {"peak_position_m", h.span.peak_position_m},
                                  {"peak_nstrain", h.span.peak_value},
                                  {"peak_time", core::format_utc(h.span.peak_time)},
                                  {"static_feature", botdr_present ? json(h.static_feature) : json(nullptr)}});
  }
  j["strain_peaks"] = json::array();
  for (const auto& c : strain_peaks) {
    j["strain_peaks"].push_back({{"position_m", c.peak.position_m},
                                 {"delta_ue", c.peak.value},
                                 {"start_m", c.peak.start_m},
                                 {"end_m", c.peak.end_m},
                                 {"colocated", das_present ? json(c.colocated) : json(nullptr)},
                                 {"hot_span", c.hot_span ? json(*c.hot_span) : json(nullptr)},
                                 {"distance_m", c.distance_m}});
  }
  j["tones"] = {{"das", json::array()}, {"sop", json::array()}};
  for (const auto& t : das_tones) j["tones"]["das"].push_back(tone_json(t));
  for (const auto& t : sop_tones) j["tones"]["sop"].push_back(tone_json(t));
  j["sop_fluctuation"] = {{"storm", optional_json(sop_storm_fluctuation)},
                          {"calm", optional_json(sop_calm_fluctuation)}};
  j["notes"] = notes;
  return j;
}

std::string CrossModalReport::to_text() const {
  std::ostringstream os;
  os << "Cross-modal report: " << scenario << "\n";
  os << fmt::format("modalities: DAS {}, BOTDR {}, SOP {}\n", das_present ? "yes" : "absent",
                    botdr_present ? "yes" : "absent", sop_present ? "yes" : "absent");
  if (!correlations.empty()) {
    os << "\nwind vs DAS activity (" << to_string(method) << ")\n";
    for (const auto& c : correlations) {
      os << fmt::format("  {:<16} {:6.2f}-{:6.2f} km  r = {:+.3f}\n", c.segment.name, c.segment.start_m / 1000.0,
                        c.segment.end_m / 1000.0, c.r);
    }
  }
  if (das_present) {
    os << "\nDAS hot spans\n";
    for (const auto& h : hot_spans) {
      os << fmt::format("  {:6.2f}-{:6.2f} km  peak {:.2f} nstrain at {:.2f} km, {}", h.span.start_m / 1000.0,
                        h.span.end_m / 1000.0, h.span.peak_value, h.span.peak_position_m / 1000.0,
                        core::format_utc(h.span.peak_time));
      if (botdr_present) os << (h.static_feature ? "  [static change]" : "  [dynamic only]");
      os << "\n";
    }
  }
  if (botdr_present) {
    os << fmt::format("\nstrain change peaks (tolerance {:.0f} m)\n", colocation_tolerance_m);
    for (const auto& c : strain_peaks) {
      os << fmt::format("  {:7.1f} microstrain at {:.2f} km", c.peak.value, c.peak.position_m / 1000.0);
      if (das_present) os << (c.colocated ? "  colocated with DAS hot span" : "  not colocated");
      os << "\n";
    }
  }
  if (!das_tones.empty() || !sop_tones.empty()) {
    os << "\nnarrowband tones\n";
    for (const auto& t : das_tones) os << "  DAS  " << tone_text(t) << "\n";
    for (const auto& t : sop_tones) os << "  SOP  " << tone_text(t) << "\n";
  }
  if (sop_storm_fluctuation && sop_calm_fluctuation) {
    os << fmt::format("\nSOP S1/S0 fluctuation: storm {:.4f}, calm {:.4f}\n", *sop_storm_fluctuation,
                      *sop_calm_fluctuation);
  }
  if (!notes.empty()) {
    os << "\nnotes\n";
    for (const auto& n : notes) os << "  - " << n << "\n";
  }
  return os.str();
}

}  // namespace fibersense::analysis
