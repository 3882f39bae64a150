#include "ccc/data/mask.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ccc/error.hpp"

namespace ccc::data {

void MaskConfig::validate() const {
  if (!(sigma_px > 0.0)) throw ConfigError("sigma_px", fmt::format("sigma_px must be > 0, got {}", sigma_px));
}

Polyline densify(const Polyline& line, double spacing) {
  Polyline out;
  if (line.empty()) return out;
  out.push_back(line.front());
  for (std::size_t i = 1; i < line.size(); ++i) {
    const auto& a = line[i - 1];
    const auto& b = line[i];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / spacing)));
    for (std::size_t s = 1; s <= pieces; ++s) {
      const double t = static_cast<double>(s) / static_cast<double>(pieces);
      out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.radius + t * (b.radius - a.radius)});
    }
  }
  return out;
}

nn::Tensor gaussian_mask(const CenterlineSet& centerlines, std::size_t height, std::size_t width,
                         const MaskConfig& cfg) {
  cfg.validate();
  if (height == 0 || width == 0) throw ShapeError("size", "mask dimensions must be positive");
  nn::Tensor mask({height, width});
  const double inv_two_sigma2 = 1.0 / (2.0 * cfg.sigma_px * cfg.sigma_px);
  // Beyond r + 6σ the value is below exp(−18); those pixels stay at 0.
  const double reach = 6.0 * cfg.sigma_px;
  const auto h = static_cast<long>(height), w = static_cast<long>(width);
  for (const auto& line : centerlines.polylines) {
    for (const auto& c : densify(line)) {
      const double extent = c.radius + reach;
      const long y0 = std::max(0L, static_cast<long>(std::floor(c.y - extent)));
      const long y1 = std::min(h - 1, static_cast<long>(std::ceil(c.y + extent)));
      const long x0 = std::max(0L, static_cast<long>(std::floor(c.x - extent)));
      const long x1 = std::min(w - 1, static_cast<long>(std::ceil(c.x + extent)));
      for (long y = y0; y <= y1; ++y) {
        for (long x = x0; x <= x1; ++x) {
          const double beyond = std::max(0.0, std::hypot(x - c.x, y - c.y) - c.radius);
          if (beyond > reach) continue;
          const auto v = static_cast<float>(std::exp(-beyond * beyond * inv_two_sigma2));
          float& m = mask.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x));
          m = std::max(m, v);
        }
      }
    }
  }
  return mask;
}

}  // namespace ccc::data
