#include "bronchometer/raster.hpp"

#include <algorithm>
#include <array>

namespace bronchometer {

Frame Frame::crop(const BoundingBox& r) const {
  Frame out(r.width(), r.height(), 0, index);
  for (int y = r.y_min; y <= r.y_max; ++y) {
    const auto* src = pixels.data() + static_cast<std::size_t>(y) * width + r.x_min;
    std::copy(src, src + out.width, out.pixels.begin() + static_cast<std::size_t>(y - r.y_min) * out.width);
  }
  return out;
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count_if(data.begin(), data.end(), [](auto v) { return v != 0; }));
}

Mask Mask::from_points(int w, int h, std::span<const Point> pts) {
  Mask m(w, h);
  for (const auto& p : pts) {
    if (m.in_bounds(p.x, p.y)) m.set(p.x, p.y);
  }
  return m;
}

std::vector<Point> Mask::points() const {
  std::vector<Point> out;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (data[static_cast<std::size_t>(y) * width + x]) out.push_back({x, y});
  return out;
}

namespace {
constexpr std::array<Point, 8> kNeighbors8{{{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};
}

std::vector<Component> label_components(int width, int height,
                                        const std::function<bool(int, int)>& is_foreground) {
  std::vector<Component> components;
  std::vector<std::uint8_t> visited(static_cast<std::size_t>(width) * height, 0);
  std::vector<Point> stack;

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const auto idx = static_cast<std::size_t>(y) * width + x;
      if (visited[idx] || !is_foreground(x, y)) continue;

      Component comp;
      visited[idx] = 1;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const Point p = stack.back();
        stack.pop_back();
        comp.push_back(p);
        for (const auto& d : kNeighbors8) {
          const int nx = p.x + d.x;
          const int ny = p.y + d.y;
          if (nx < 0 || ny < 0 || nx >= width || ny >= height) continue;
          const auto nidx = static_cast<std::size_t>(ny) * width + nx;
          if (visited[nidx] || !is_foreground(nx, ny)) continue;
          visited[nidx] = 1;
          stack.push_back({nx, ny});
        }
      }
      components.push_back(std::move(comp));
    }
  }
  return components;
}

BoundingBox bounding_box(const Component& component) {
  BoundingBox b{component.front().x, component.front().y, component.front().x, component.front().y};
  for (const auto& p : component) {
    b.x_min = std::min(b.x_min, p.x);
    b.y_min = std::min(b.y_min, p.y);
    b.x_max = std::max(b.x_max, p.x);
    b.y_max = std::max(b.y_max, p.y);
  }
  return b;
}

Mask largest_region(const Mask& mask) {
  const auto comps = label_components(mask.width, mask.height, [&](int x, int y) { return mask.get(x, y); });
  Mask out(mask.width, mask.height);
  if (comps.empty()) return out;
  const auto* best = &comps.front();
  for (const auto& c : comps)
    if (c.size() > best->size()) best = &c;
  for (const auto& p : *best) out.set(p.x, p.y);
  return out;
}

}  // namespace bronchometer
