#include "plots.hpp"

#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "fibersense/core/io.hpp"

namespace fibersense::app {

namespace fs = std::filesystem;
using core::format_number;

namespace {

struct Panel {
  const char* id;
  const char* file;
  const char* title;
  const char* columns;
};

// Everything the manifest can list, in display order.
constexpr Panel kPanels[] = {
    {"wind", "wind.csv", "Station-averaged wind speed", "sim_time,wind_time,wind_mps"},
    {"das_std", "das_std.csv", "DAS strain std per block", "time,position_m,std_nstrain"},
    {"bfs_difference", "bfs_difference.csv", "BOTDR strain change against the pre-storm scan",
     "position_m,delta_after_ue,delta_relaxed_ue"},
    {"sop_s1", "sop_s1.csv", "Normalized S1 from windowed RMS", "time,s1_norm,valid"},
    {"sop_spectrogram", "sop_spectrogram.csv", "SOP spectrogram (px - py)", "time,freq_hz,power_db"},
    {"das_spectrogram", "das_spectrogram.csv", "DAS spectrogram at one tap", "time,freq_hz,power_db"},
};

std::ofstream open_plot(const fs::path& root, const char* file, const char* columns) {
  fs::create_directories(root / "plots");
  std::ofstream os(root / "plots" / file);
  if (!os) throw std::runtime_error(fmt::format("cannot write '{}'", (root / "plots" / file).string()));
  os << columns << '\n';
  return os;
}

const Panel& panel(const char* id) {
  for (const auto& p : kPanels) {
    if (std::string_view(p.id) == id) return p;
  }
  throw std::logic_error("unknown plot panel");
}

std::string rel(const Panel& p) { return std::string("plots/") + p.file; }

void spectrogram_table(std::ofstream& os, const core::Waterfall& spec) {
  for (std::size_t r = 0; r < spec.rows(); ++r) {
    const std::string t = core::format_utc(spec.time.at(r));
    for (std::size_t c = 0; c < spec.cols(); ++c) {
      const double f = spec.position.at(c);
      if (f > kPlotMaxHz) break;
      os << t << ',' << format_number(f) << ',' << format_number(spec(r, c)) << '\n';
    }
  }
}

}  // namespace

std::vector<std::string> write_wind_plot(const fs::path& root, const core::Series& wind_sim,
                                         const scenario::Timeline& timeline) {
  const Panel& p = panel("wind");
  auto os = open_plot(root, p.file, p.columns);
  for (std::size_t i = 0; i < wind_sim.values.size(); ++i) {
    const auto t = wind_sim.time.at(i);
    os << core::format_utc(t) << ',' << core::format_utc(timeline.to_wind_clock(t)) << ','
       << format_number(wind_sim.values[i]) << '\n';
  }
  return {rel(p)};
}

std::vector<std::string> write_das_plots(const fs::path& root, const core::Waterfall& std_nstrain,
                                         const core::Waterfall* spectrogram, double tap_m) {
  std::vector<std::string> out;
  {
    const Panel& p = panel("das_std");
    auto os = open_plot(root, p.file, p.columns);
    for (std::size_t r = 0; r < std_nstrain.rows(); ++r) {
      const std::string t = core::format_utc(std_nstrain.time.at(r));
      for (std::size_t c = 0; c < std_nstrain.cols(); ++c) {
        os << t << ',' << format_number(std_nstrain.position.at(c)) << ',' << format_number(std_nstrain(r, c)) << '\n';
      }
    }
    out.push_back(rel(p));
  }
  if (spectrogram) {
    const Panel& p = panel("das_spectrogram");
    auto os = open_plot(root, p.file, p.columns);
    spectrogram_table(os, *spectrogram);
    out.push_back(rel(p));
    std::ofstream note(root / "plots" / "das_spectrogram_tap.txt");
    note << "tap_position_m=" << format_number(tap_m) << '\n';
    out.push_back("plots/das_spectrogram_tap.txt");
  }
  return out;
}

std::vector<std::string> write_botdr_plots(const fs::path& root, const core::Profile* after,
                                           const core::Profile* relaxed) {
  const core::Profile* grid = after ? after : relaxed;
  if (!grid) return {};
  const Panel& p = panel("bfs_difference");
  auto os = open_plot(root, p.file, p.columns);
  auto cell = [](const core::Profile* prof, std::size_t i) {
    return prof && prof->is_valid(i) ? format_number(prof->values[i]) : std::string();
  };
  for (std::size_t i = 0; i < grid->values.size(); ++i) {
    os << format_number(grid->position.at(i)) << ',' << cell(after, i) << ',' << cell(relaxed, i) << '\n';
  }
  return {rel(p)};
}

std::vector<std::string> write_sop_plots(const fs::path& root, const sop::StokesSeries& s1,
                                         const core::Waterfall& spectrogram) {
  std::vector<std::string> out;
  {
    const Panel& p = panel("sop_s1");
    auto os = open_plot(root, p.file, p.columns);
    for (std::size_t k = 0; k < s1.s1_norm.values.size(); ++k) {
      os << core::format_utc(s1.s1_norm.time.at(k)) << ',' << format_number(s1.s1_norm.values[k]) << ','
         << static_cast<int>(s1.valid[k]) << '\n';
    }
    out.push_back(rel(p));
  }
  {
    const Panel& p = panel("sop_spectrogram");
    auto os = open_plot(root, p.file, p.columns);
    spectrogram_table(os, spectrogram);
    out.push_back(rel(p));
  }
  return out;
}

std::string write_plot_manifest(const fs::path& root) {
  nlohmann::json j;
  j["schema"] = "plt1";
  j["panels"] = nlohmann::json::array();
  for (const auto& p : kPanels) {
    if (!fs::exists(root / "plots" / p.file)) continue;
    j["panels"].push_back({{"id", p.id}, {"file", p.file}, {"title", p.title}, {"columns", p.columns}});
  }
  fs::create_directories(root / "plots");
  std::ofstream os(root / "plots" / "manifest.json", std::ios::binary | std::ios::trunc);
  os << j.dump(2) << '\n';
  return "plots/manifest.json";
}

}  // namespace fibersense::app
