#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fibersense/core/types.hpp"
#include "fibersense/scenario/scenario.hpp"
#include "fibersense/sop/sop.hpp"

// Plot-ready CSV tables, one per figure panel, under plots/. Each writer
// returns the paths it wrote relative to the output root.
namespace fibersense::app {

/// Spectrogram tables stop here; everything of interest is below it.
inline constexpr double kPlotMaxHz = 10.0;

std::vector<std::string> write_wind_plot(const std::filesystem::path& root, const core::Series& wind_sim,
                                         const scenario::Timeline& timeline);
std::vector<std::string> write_das_plots(const std::filesystem::path& root, const core::Waterfall& std_nstrain,
                                         const core::Waterfall* spectrogram, double tap_m);
std::vector<std::string> write_botdr_plots(const std::filesystem::path& root, const core::Profile* after,
                                           const core::Profile* relaxed);
std::vector<std::string> write_sop_plots(const std::filesystem::path& root, const sop::StokesSeries& s1,
                                         const core::Waterfall& spectrogram);
/// plots/manifest.json describing the panels present on disk.
std::string write_plot_manifest(const std::filesystem::path& root);

}  // namespace fibersense::app
