#include "pwsim/field.hpp"

#include "pwsim/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace pwsim {

double dispersion_omega(const Vec2 &k, double m) { return std::sqrt(m * m + k.norm2()); }

Vec2 group_velocity(const Vec2 &k, double m) { return k / dispersion_omega(k, m); }

FieldState FieldState::zeros(const GridSpec &grid) {
  return FieldState{grid, std::vector<double>(grid.nodes(), 0.0), std::vector<double>(grid.nodes(), 0.0), 0.0};
}

bool FieldState::finite() const {
  auto ok = [](double v) { return std::isfinite(v); };
  return std::all_of(phi.begin(), phi.end(), ok) && std::all_of(eta.begin(), eta.end(), ok);
}

SpectralField SpectralField::zeros(const GridSpec &grid) {
  return SpectralField{grid, std::vector<Complex>(grid.modes()), std::vector<Complex>(grid.modes()), 0.0};
}

SpectralField to_spectral(const FieldState &f, Fft2d &fft) {
  if (f.phi.size() != f.grid.nodes() || f.eta.size() != f.grid.nodes())
    throw std::invalid_argument("field arrays do not match grid");
  return SpectralField{f.grid, fft.forward(f.phi), fft.forward(f.eta), f.time};
}

FieldState to_grid(const SpectralField &s, Fft2d &fft) {
  return FieldState{s.grid, fft.inverse(s.phi), fft.inverse(s.eta), s.time};
}

ModeTable::ModeTable(const GridSpec &g, double source_variance) : grid(g) {
  if (!(source_variance > 0.0)) throw ConfigError("source variance must be positive", "physics.source_variance");
  const int n = g.n();
  const int h = g.half();
  kx.resize(h);
  ky.resize(n);
  weight.resize(h);
  for (int j = 0; j < h; ++j) {
    kx[j] = kTwoPi * j / g.side();
    weight[j] = (j == 0 || j == n / 2) ? 1.0 : 2.0;
  }
  for (int j = 0; j < n; ++j) ky[j] = g.wavenumber(j);
  omega2.resize(g.modes());
  kernel.resize(g.modes());
  const double m2 = g.mass() * g.mass();
  for (int jy = 0; jy < n; ++jy) {
    for (int jx = 0; jx < h; ++jx) {
      const double k2 = kx[jx] * kx[jx] + ky[jy] * ky[jy];
      omega2[index(jy, jx)] = m2 + k2;
      kernel[index(jy, jx)] = derivative_zero(jy, jx) ? 0.0 : std::exp(-0.5 * source_variance * k2);
    }
  }
}

void SourceSpec::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw ConfigError("source variance must be positive", "physics.source_variance");
  if (!std::isfinite(amplitude)) throw SolverError("non-finite source amplitude");
  if (!center.finite()) throw SolverError("non-finite source position");
}

SourceSpec source_for(const ParticleState &p, double b, double m, double variance) {
  if (!p.finite()) throw SolverError("non-finite particle state");
  return SourceSpec{p.position, b / (m * p.gamma()), variance};
}

std::vector<double> build_source(const SourceSpec &src, const GridSpec &grid) {
  src.validate();
  const int n = grid.n();
  const double h = grid.spacing();
  const double L = grid.side();
  const Vec2 c = grid.wrap(src.center);
  const double sigma = std::sqrt(src.variance);
  const int images = 1 + static_cast<int>(std::ceil(12.0 * sigma / L));

  // The wrapped Gaussian factorizes per axis.
  auto axis = [&](double c0) {
    std::vector<double> g(n, 0.0);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int img = -images; img <= images; ++img) {
        const double d = i * h - c0 + img * L;
        s += std::exp(-0.5 * d * d / src.variance);
      }
      g[i] = s;
    }
    return g;
  };
  const std::vector<double> gx = axis(c.x);
  const std::vector<double> gy = axis(c.y);
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i) {
    sx += gx[i];
    sy += gy[i];
  }
  // Normalize on the grid so the discrete integral is exactly the amplitude.
  const double scale = src.amplitude / (sx * sy * grid.cell_area());
  std::vector<double> out(grid.nodes());
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) out[static_cast<std::size_t>(iy) * n + ix] = scale * gx[ix] * gy[iy];
  return out;
}

std::vector<double> build_source(const ParticleState &p, double b, const GridSpec &grid) {
  return build_source(source_for(p, b, grid.mass(), default_source_variance(grid.mass())), grid);
}

FieldStepper::FieldStepper(const GridSpec &grid, double blowup_threshold)
    : grid_(grid), blowup_(blowup_threshold), fft_(grid.n()) {
  const ModeTable modes(grid, 1.0);
  omega2_ = modes.omega2;
}

SpectralField FieldStepper::step(const SpectralField &s, double dt, std::span<const Complex> src) const {
  if (!(dt > 0.0) || dt > grid_.max_stable_dt() * (1.0 + 1e-12))
    throw ConfigError("dt = " + std::to_string(dt) + " outside (0, " + std::to_string(grid_.max_stable_dt()) +
                          "] (stability bound)",
                      "time.dt");
  if (s.phi.size() != grid_.modes() || src.size() != grid_.modes())
    throw std::invalid_argument("spectral arrays do not match grid");
  SpectralField out{grid_, std::vector<Complex>(grid_.modes()), std::vector<Complex>(grid_.modes()),
                    s.time + dt};
  const double h2 = 0.5 * dt, h6 = dt / 6.0;
  for (std::size_t i = 0; i < grid_.modes(); ++i) {
    const double w2 = omega2_[i];
    const Complex p0 = s.phi[i], e0 = s.eta[i], f = src[i];
    const Complex kp1 = e0, ke1 = f - w2 * p0;
    const Complex p1 = p0 + h2 * kp1, e1 = e0 + h2 * ke1;
    const Complex kp2 = e1, ke2 = f - w2 * p1;
    const Complex p2 = p0 + h2 * kp2, e2 = e0 + h2 * ke2;
    const Complex kp3 = e2, ke3 = f - w2 * p2;
    const Complex p3 = p0 + dt * kp3, e3 = e0 + dt * ke3;
    const Complex kp4 = e3, ke4 = f - w2 * p3;
    out.phi[i] = p0 + h6 * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4);
    out.eta[i] = e0 + h6 * (ke1 + 2.0 * ke2 + 2.0 * ke3 + ke4);
  }
  return out;
}

FieldState FieldStepper::step(const FieldState &state, double dt, std::span<const double> source) {
  if (!(state.grid == grid_)) throw std::invalid_argument("field grid does not match stepper grid");
  if (source.size() != grid_.nodes()) throw std::invalid_argument("source does not match grid");
  const SpectralField s = to_spectral(state, fft_);
  const std::vector<Complex> src = fft_.forward(source);
  FieldState out = to_grid(step(s, dt, src), fft_);
  double peak = 0.0;
  for (double v : out.phi) {
    if (!std::isfinite(v)) throw SolverError("non-finite field value");
    peak = std::max(peak, std::abs(v));
  }
  if (peak > blowup_) throw SolverError("field blow-up: max|phi| = " + std::to_string(peak));
  return out;
}

FieldState step_field(const FieldState &state, double dt, std::span<const double> source) {
  FieldStepper stepper(state.grid);
  return stepper.step(state, dt, source);
}

std::vector<double> spectral_laplacian(const GridSpec &grid, std::span<const double> f) {
  Fft2d fft(grid.n());
  const ModeTable modes(grid, 1.0);
  std::vector<Complex> c = fft.forward(f);
  const double m2 = grid.mass() * grid.mass();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= -(modes.omega2[i] - m2);
  return fft.inverse(c);
}

std::array<std::vector<double>, 2> spectral_gradient(const GridSpec &grid, std::span<const double> f) {
  Fft2d fft(grid.n());
  const ModeTable modes(grid, 1.0);
  const std::vector<Complex> c = fft.forward(f);
  std::vector<Complex> cx(c.size()), cy(c.size());
  const Complex I(0.0, 1.0);
  for (int jy = 0; jy < grid.n(); ++jy) {
    for (int jx = 0; jx < grid.half(); ++jx) {
      const std::size_t i = modes.index(jy, jx);
      if (modes.derivative_zero(jy, jx)) continue;
      cx[i] = I * modes.kx[jx] * c[i];
      cy[i] = I * modes.ky[jy] * c[i];
    }
  }
  return {fft.inverse(cx), fft.inverse(cy)};
}

PointSample sample_spectrum(const ModeTable &modes, std::span<const Complex> coeffs, const Vec2 &q,
                            std::span<const double> kernel) {
  const int n = modes.grid.n();
  const int h = modes.grid.half();
  std::vector<Complex> ex(h), ey(n);
  for (int j = 0; j < h; ++j) ex[j] = std::polar(1.0, modes.kx[j] * q.x);
  for (int j = 0; j < n; ++j) ey[j] = std::polar(1.0, modes.ky[j] * q.y);

  double val = 0.0, gx = 0.0, gy = 0.0;
  const bool weighted = !kernel.empty();
  const int nyq = n / 2;
  for (int jy = 0; jy < n; ++jy) {
    const Complex *c = coeffs.data() + modes.index(jy, 0);
    const double *kw = weighted ? kernel.data() + modes.index(jy, 0) : nullptr;
    // Phases factorize, so sum each row first and apply the row phase once.
    Complex sv = 0.0, sgx = 0.0;
    for (int jx = 0; jx < nyq; ++jx) {
      Complex z = c[jx] * ex[jx];
      if (kw) z *= kw[jx];
      z *= modes.weight[jx];
      sv += z;
      sgx += modes.kx[jx] * z;
    }
    Complex zn = c[nyq] * ex[nyq];
    if (kw) zn *= kw[nyq];
    const Complex e = ey[jy];
    val += ((sv + zn) * e).real();
    // Nyquist bins carry no derivative.
    if (modes.grid.is_nyquist(jy)) continue;
    gx -= (sgx * e).imag();
    gy -= modes.ky[jy] * (sv * e).imag();
  }
  const double inv = 1.0 / static_cast<double>(modes.grid.nodes());
  return PointSample{val * inv, Vec2{gx * inv, gy * inv}};
}

FieldSampler::FieldSampler(const FieldState &state, Interp method)
    : method_(method), modes_(state.grid, 1.0) {
  Fft2d fft(state.grid.n());
  phi_hat_ = fft.forward(state.phi);
  eta_hat_ = fft.forward(state.eta);
  if (method_ == Interp::Bicubic) {
    phi_ = state.phi;
    eta_ = state.eta;
    auto grad = spectral_gradient(state.grid, state.phi);
    dx_ = std::move(grad[0]);
    dy_ = std::move(grad[1]);
  }
}

double FieldSampler::bicubic(std::span<const double> f, const Vec2 &q) const {
  const GridSpec &g = modes_.grid;
  const int n = g.n();
  const Vec2 w = g.wrap(q);
  const double fx = w.x / g.spacing(), fy = w.y / g.spacing();
  const int ix = static_cast<int>(std::floor(fx)), iy = static_cast<int>(std::floor(fy));
  const double tx = fx - ix, ty = fy - iy;
  auto cr = [](double t) {
    const double t2 = t * t, t3 = t2 * t;
    return std::array<double, 4>{0.5 * (-t3 + 2 * t2 - t), 0.5 * (3 * t3 - 5 * t2 + 2), 0.5 * (-3 * t3 + 4 * t2 + t),
                                 0.5 * (t3 - t2)};
  };
  const auto wx = cr(tx), wy = cr(ty);
  auto at = [&](int i, int j) {
    i = ((i % n) + n) % n;
    j = ((j % n) + n) % n;
    return f[static_cast<std::size_t>(j) * n + i];
  };
  double s = 0.0;
  for (int b = 0; b < 4; ++b) {
    double r = 0.0;
    for (int a = 0; a < 4; ++a) r += wx[a] * at(ix - 1 + a, iy - 1 + b);
    s += wy[b] * r;
  }
  return s;
}

double FieldSampler::value(const Vec2 &q) const {
  if (method_ == Interp::Bicubic) return bicubic(phi_, q);
  return sample_spectrum(modes_, phi_hat_, q).value;
}

Vec2 FieldSampler::gradient(const Vec2 &q) const {
  if (method_ == Interp::Bicubic) return {bicubic(dx_, q), bicubic(dy_, q)};
  return sample_spectrum(modes_, phi_hat_, q).gradient;
}

double FieldSampler::eta(const Vec2 &q) const {
  if (method_ == Interp::Bicubic) return bicubic(eta_, q);
  return sample_spectrum(modes_, eta_hat_, q).value;
}

double sample_value(const FieldState &state, const Vec2 &q, Interp method) {
  return FieldSampler(state, method).value(q);
}

Vec2 sample_gradient(const FieldState &state, const Vec2 &q, Interp method) {
  return FieldSampler(state, method).gradient(q);
}

Vec2 field_momentum(const SpectralField &s, const ModeTable &modes) {
  double px = 0.0, py = 0.0;
  for (int jy = 0; jy < modes.grid.n(); ++jy) {
    for (int jx = 0; jx < modes.grid.half(); ++jx) {
      if (modes.derivative_zero(jy, jx)) continue;
      const std::size_t i = modes.index(jy, jx);
      const double im = (s.eta[i] * std::conj(s.phi[i])).imag() * modes.weight[jx];
      px += modes.kx[jx] * im;
      py += modes.ky[jy] * im;
    }
  }
  const GridSpec &g = modes.grid;
  const double scale = -g.mass() * g.mass() * g.cell_area() / static_cast<double>(g.nodes());
  return {px * scale, py * scale};
}

double field_energy(const SpectralField &s, const ModeTable &modes) {
  double e = 0.0;
  for (int jy = 0; jy < modes.grid.n(); ++jy) {
    for (int jx = 0; jx < modes.grid.half(); ++jx) {
      const std::size_t i = modes.index(jy, jx);
      e += modes.weight[jx] * (std::norm(s.eta[i]) + modes.omega2[i] * std::norm(s.phi[i]));
    }
  }
  const GridSpec &g = modes.grid;
  return 0.5 * e * g.mass() * g.mass() * g.cell_area() / static_cast<double>(g.nodes());
}

Vec2 field_momentum(const FieldState &state) {
  Fft2d fft(state.grid.n());
  return field_momentum(to_spectral(state, fft), ModeTable(state.grid, 1.0));
}

double field_energy(const FieldState &state) {
  Fft2d fft(state.grid.n());
  return field_energy(to_spectral(state, fft), ModeTable(state.grid, 1.0));
}

double field_angular_momentum(const FieldState &state, const Vec2 &origin) {
  const GridSpec &g = state.grid;
  const auto grad = spectral_gradient(g, state.phi);
  const int n = g.n();
  double lz = 0.0;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t i = static_cast<std::size_t>(iy) * n + ix;
      Vec2 r = g.separation(g.node(ix, iy), origin);
      // Nodes exactly half a period away are equally far both ways.
      if (std::abs(std::abs(r.x) - 0.5 * g.side()) < 1e-9 * g.side()) r.x = 0.0;
      if (std::abs(std::abs(r.y) - 0.5 * g.side()) < 1e-9 * g.side()) r.y = 0.0;
      const Vec2 p{-state.eta[i] * grad[0][i], -state.eta[i] * grad[1][i]};
      lz += r.cross(p);
    }
  }
  return lz * g.mass() * g.mass() * g.cell_area();
}

}  // namespace pwsim
