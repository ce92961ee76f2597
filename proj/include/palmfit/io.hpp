#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "palmfit/core.hpp"
#include "palmfit/fit.hpp"
#include "palmfit/inference.hpp"

namespace palmfit {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kFitSchema = "palmfit/fit/1";
inline constexpr const char* kWindowsSchema = "palmfit/windows/1";
inline constexpr const char* kCccdSchema = "palmfit/cccd/1";
inline constexpr const char* kManifestSchema = "palmfit/manifest/1";
inline constexpr const char* kTablesSchema = "palmfit/tables/1";
inline constexpr const char* kReportsSchema = "palmfit/reports/1";

// Point pattern CSV: header row required, columns x,y(,z) with optional
// class,image_id,patient_id,outcome. Window bounds are supplied separately,
// never inferred from the data.
PointPattern read_pattern_csv(const std::filesystem::path& path, const Window& window);
void write_pattern_csv(const std::filesystem::path& path, const PointPattern& p);

// Cohort CSV: patient_id,image_id,class,x,y(,z),outcome. Window per image
// from the sidecar map ("" key = default for all images).
CohortDataset read_cohort_csv(const std::filesystem::path& path,
                              const std::map<std::string, Window>& windows);

// "x0,y0,...,x1,y1,..." -> Window (lower corner then upper corner).
Window parse_window_spec(const std::string& spec);

// Windows sidecar JSON: {"schema": ..., "default": {"lower": [...],
// "upper": [...]}, "images": {id: {...}}}. Keyed with "" for the default.
std::map<std::string, Window> read_windows_json(const std::filesystem::path& path);

void write_fit_json(const std::filesystem::path& path, ModelKind model,
                    const FitResult& fit);
std::pair<ModelKind, FitResult> read_fit_json(const std::filesystem::path& path);

std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_file(const std::filesystem::path& path);

// Reproducibility sidecar written next to every output: command line, seed,
// library version, input digests and timestamp (SOURCE_DATE_EPOCH wins over
// the wall clock when set).
void write_manifest(const std::filesystem::path& path,
                    const std::vector<std::string>& argv, std::uint64_t seed,
                    const std::vector<std::filesystem::path>& inputs);

}  // namespace palmfit
