#pragma once

// Model persistence. A model file is one compact JSON object:
//
//   {"checksum": "<16 hex digits>", "format_version": 1, "kind": "crisp",
//    "label_space": {"names": [...], "separator": " "},
//    "functions": [{"boundary": "ml", "weights": [w_box_s, w_dtoc, bias]}, ...]}
//
// or, for kind "fuzzy",
//
//    "rules": [{"mean": [m0, m1], "covariance": [s00, s01, s11], "center": y}, ...]
//
// The checksum is 64-bit FNV-1a over the compact dump of the object without
// its checksum member. Doubles are written in shortest round-trip form, so a
// loaded model classifies exactly like the saved one.

#include "ckim/crisp.hpp"
#include "ckim/fuzzy.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

namespace ckim {

inline constexpr int kModelFormatVersion = 1;

using Model = std::variant<CrispModel, FuzzyModel>;

[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes) noexcept;

[[nodiscard]] std::string serialize_model(const Model& model);
[[nodiscard]] Model parse_model(std::string_view text);

/// Returns the number of bytes written.
std::size_t save_model(const Model& model, const std::filesystem::path& path);
[[nodiscard]] Model load_model(const std::filesystem::path& path);

[[nodiscard]] const LabelSpace& label_space(const Model& model);
[[nodiscard]] SizeClass classify(const Model& model, const FeatureVector& x);
[[nodiscard]] std::string_view kind_name(const Model& model);

}  // namespace ckim
