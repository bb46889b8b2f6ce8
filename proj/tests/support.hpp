#pragma once

#include <functional>
#include <memory>
#include <numbers>

#include "imcf/graphsurf.hpp"

namespace support {

using namespace imcf;

inline std::shared_ptr<const warp::WarpSpec> euclid() {
  return std::make_shared<const warp::WarpSpec>(warp::euclidean());
}
inline std::shared_ptr<const warp::WarpSpec> hyper(double a = 1.0) {
  return std::make_shared<const warp::WarpSpec>(warp::hyperboloidal(a));
}

inline std::shared_ptr<const cap::CapMesh> mesh(int n, double theta0, int nt,
                                                cap::Mode mode = cap::Mode::axisym, int np = 1) {
  return std::make_shared<const cap::CapMesh>(cap::build_mesh(n, theta0, mode, nt, np));
}

inline cap::ScalarField sample(const cap::CapMesh& m, const std::function<double(double, double)>& f) {
  cap::ScalarField out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) { out[i] = f(m.theta(m.row_of(i)), m.psi(m.column_of(i))); }
  return out;
}

inline graph::GraphState radius_state(std::shared_ptr<const warp::WarpSpec> w,
                                      std::shared_ptr<const cap::CapMesh> m,
                                      const std::function<double(double, double)>& u) {
  auto field = sample(*m, u);
  return graph::GraphState::from_radius(m, warp::make_chart(std::move(w)), field);
}

inline graph::GraphState phi_state(std::shared_ptr<const warp::WarpSpec> w,
                                   std::shared_ptr<const cap::CapMesh> m, double level,
                                   const std::function<double(double, double)>& dev) {
  auto field = sample(*m, dev);
  return graph::GraphState::from_phi(m, warp::make_chart(std::move(w)), level, field);
}

}  // namespace support
