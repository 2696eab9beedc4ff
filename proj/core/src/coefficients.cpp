#include "wavegec/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "wavegec/errors.hpp"

namespace wavegec::coefficients {

namespace {
constexpr double kPi = std::numbers::pi;

// 7th-order smoothstep on [0, 1]: 35x^4 - 84x^5 + 70x^6 - 20x^7.
double s3(double x) { return ((((-20.0 * x + 70.0) * x - 84.0) * x + 35.0)) * x * x * x * x; }
double s3d1(double x) {
  const double y = x * (1.0 - x);
  return 140.0 * y * y * y;
}
double s3d2(double x) { return (((-840.0 * x + 2100.0) * x - 1680.0) * x + 420.0) * x * x; }
double s3d3(double x) { return (((-4200.0 * x + 8400.0) * x - 5040.0) * x + 840.0) * x; }
}  // namespace

CutoffShape::CutoffShape(double a, double b, double ramp_width) : a_(a), b_(b), w_(ramp_width) {
  if (!(b - a >= 2.0 * ramp_width) || !(ramp_width > 0.0)) {
    throw std::invalid_argument("CutoffShape: interval too short for the ramps");
  }
}

double CutoffShape::value(double t) const {
  if (t <= a_ || t >= b_) return 0.0;
  if (t < a_ + w_) return s3((t - a_) / w_);
  if (t > b_ - w_) return s3((b_ - t) / w_);
  return 1.0;
}

double CutoffShape::derivative(double t, int order) const {
  if (order < 1 || order > 3) throw std::out_of_range("CutoffShape: derivative order");
  if (t <= a_ || t >= b_) return 0.0;
  double x, sign;
  if (t < a_ + w_) {
    x = (t - a_) / w_;
    sign = 1.0;
  } else if (t > b_ - w_) {
    x = (b_ - t) / w_;
    sign = (order % 2 == 1) ? -1.0 : 1.0;
  } else {
    return 0.0;
  }
  const double scale = std::pow(w_, -order);
  switch (order) {
    case 1: return sign * scale * s3d1(x);
    case 2: return sign * scale * s3d2(x);
    default: return sign * scale * s3d3(x);
  }
}

double CutoffShape::max_abs(int order, int grid_n) const {
  double worst = 0.0;
  for (int i = 0; i <= grid_n; ++i) {
    const double t = a_ + (b_ - a_) * i / grid_n;
    const double v = order == 0 ? value(t) : derivative(t, order);
    worst = std::max(worst, std::abs(v));
  }
  return worst;
}

SmoothFunction CutoffShape::as_function() const {
  CutoffShape self = *this;
  return SmoothFunction([self](double t) { return self.value(t); },
                        [self](double t) { return self.derivative(t, 1); },
                        [self](double t) { return self.derivative(t, 2); },
                        [self](double t) { return self.derivative(t, 3); });
}

CutoffShape make_cutoff(double a, double b) {
  if (!(b - a >= 3.0)) {
    throw std::invalid_argument("make_cutoff: need b - a >= 3");
  }
  double w = 1.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    CutoffShape theta(a, b, w);
    bool ok = true;
    for (int order = 0; order <= 3 && ok; ++order) {
      ok = theta.max_abs(order) <= 100.0;
    }
    if (ok) return theta;
    const double wider = w * 2.0;
    if (b - a < 2.0 * wider + 1.0) break;
    w = wider;
  }
  throw NumericError("make_cutoff: derivative bounds not attainable");
}

SmoothFunction Modulation::as_function() const {
  SmoothFunction prod = smooth_product(theta.as_function(), gamma_sq);
  return smooth_scale(prod, eps0 / lambda);
}

Modulation make_modulation(double eps0, double lambda, CutoffShape theta,
                           SmoothFunction gamma_sq) {
  if (!(eps0 > 0.0 && eps0 <= 1.0)) {
    throw PreconditionError("make_modulation: need 0 < eps0 <= 1");
  }
  if (!(lambda > 0.0)) throw PreconditionError("make_modulation: need lambda > 0");
  if (gamma_sq.max_order() < 3) {
    throw PreconditionError("make_modulation: gamma^2 needs three derivatives");
  }
  return Modulation{eps0, lambda, theta, std::move(gamma_sq)};
}

// ---------------------------------------------------------------------------
// Coefficient internals

namespace {

struct DgcsEval {
  double c, c1, c2;
};

// Exact evaluation of the modulated speed and its derivatives, with the slow
// parts taken at tau and the oscillation at phase phi.  Calling with
// phi = m*lambda*tau gives the true pointwise values.
DgcsEval dgcs_eval(double m, double lambda, const SmoothFunction& eps, double tau, double phi,
                   int order) {
  const double omega = m * lambda;
  const double den1 = 4.0 * m * lambda;
  const double den2 = 8.0 * m * m * lambda * lambda;
  const double den3 = 64.0 * m * m * m * m * lambda * lambda;
  const double s = std::sin(phi);
  const double co = std::cos(phi);
  const double s2 = 2.0 * s * co;
  const double c2 = co * co - s * s;
  const double ssq = s * s;
  const double s3co = ssq * s * co;
  const double s4 = ssq * ssq;

  const double e0 = eps(tau);
  const double e1 = eps.derivative(tau, 1);
  DgcsEval out{};
  out.c = m * m - e0 * s2 / den1 - e1 * ssq / den2 - e0 * e0 * s4 / den3;
  if (order < 1) return out;

  const double e2 = eps.derivative(tau, 2);
  out.c1 = -((e1 * s2 + 2.0 * omega * e0 * c2) / den1 + (e2 * ssq + omega * e1 * s2) / den2 +
             (2.0 * e0 * e1 * s4 + 4.0 * omega * e0 * e0 * s3co) / den3);
  if (order < 2) return out;

  const double e3 = eps.derivative(tau, 3);
  out.c2 = -((e2 * s2 + 4.0 * omega * e1 * c2 - 4.0 * omega * omega * e0 * s2) / den1 +
             (e3 * ssq + 2.0 * omega * e2 * s2 + 2.0 * omega * omega * e1 * c2) / den2 +
             (2.0 * (e1 * e1 + e0 * e2) * s4 + 16.0 * omega * e0 * e1 * s3co +
              4.0 * omega * omega * e0 * e0 * (3.0 * ssq * co * co - s4)) /
                 den3);
  return out;
}

// Pointwise upper bound for |c - m^2| inside a block.
double dgcs_envelope(double m, double lambda, const SmoothFunction& eps, double tau) {
  const double e0 = std::abs(eps(tau));
  const double e1 = std::abs(eps.derivative(tau, 1));
  return e0 / (4.0 * m * lambda) + e1 / (8.0 * m * m * lambda * lambda) +
         e0 * e0 / (64.0 * m * m * m * m * lambda * lambda);
}

// Per-oscillation prefix table for the integral of |c - c_inf| over a block.
struct AbsTable {
  double origin = 0.0;
  double cell = 1.0;
  std::vector<double> prefix{0.0};  // prefix[i] = integral over [origin, origin + i*cell]
};

constexpr long long kMaxTableCells = 4'000'000;

}  // namespace

struct Coefficient::Impl {
  CoeffKind coeff_kind = CoeffKind::constant;
  double domain_start = 0.0;
  double c_inf = 1.0;
  double upper = 1.0;
  double lower = 1.0;
  TailKind tail = TailKind::zero;

  struct Block {
    BlockDesc desc;
    SmoothFunction eps;

    mutable std::mutex cache_mutex;
    mutable std::unique_ptr<CumulativeIntegral> env_cum;
    mutable double mass_upper = -1.0;
    mutable std::unique_ptr<AbsTable> abs_table;
  };
  std::vector<std::unique_ptr<Block>> block_list;
  std::vector<BlockDesc> descs;

  const Block* find_block(double t, size_t* index) const {
    for (size_t i = 0; i < block_list.size(); ++i) {
      const auto& blk = *block_list[i];
      if (t >= blk.desc.a && t <= blk.desc.b) {
        if (index) *index = i;
        return &blk;
      }
      if (t < blk.desc.a) break;
    }
    return nullptr;
  }

  const CumulativeIntegral& env_integral(const Block& blk) const {
    std::lock_guard<std::mutex> lock(blk.cache_mutex);
    if (!blk.env_cum) {
      const double m = blk.desc.m;
      const double lambda = blk.desc.lambda;
      SmoothFunction eps = blk.eps;
      blk.env_cum = std::make_unique<CumulativeIntegral>(
          [m, lambda, eps](double t) { return dgcs_envelope(m, lambda, eps, t); }, blk.desc.a,
          QuadratureOptions{1e-14, 1e-10, 48, 50'000'000});
    }
    return *blk.env_cum;
  }

  double block_mass_upper(const Block& blk) const {
    if (!std::isfinite(blk.desc.b)) return std::numeric_limits<double>::infinity();
    const CumulativeIntegral& cum = env_integral(blk);
    std::lock_guard<std::mutex> lock(blk.cache_mutex);
    if (blk.mass_upper < 0.0) blk.mass_upper = cum.upto(blk.desc.b);
    return blk.mass_upper;
  }

  double eval_abs_dev(double t) const {
    size_t idx;
    const Block* blk = find_block(t, &idx);
    if (!blk) return 0.0;
    const DgcsEval e =
        dgcs_eval(blk->desc.m, blk->desc.lambda, blk->eps, t, blk->desc.m * blk->desc.lambda * t, 0);
    return std::abs(e.c - c_inf);
  }

  // Whole-window integral of |c - c_inf| over [lo, hi] within one block,
  // served from a per-oscillation prefix table.  Holds the block cache lock
  // for the whole query.
  double table_query(const Block& blk, double lo, double hi) const {
    std::lock_guard<std::mutex> lock(blk.cache_mutex);
    const double omega = blk.desc.m * blk.desc.lambda;
    const double cell = kPi / omega;
    const bool finite_b = std::isfinite(blk.desc.b);
    const double build_to = finite_b ? blk.desc.b : hi;
    const long long cells = static_cast<long long>(std::ceil((build_to - blk.desc.a) / cell));
    if (cells > kMaxTableCells) {
      throw ResourceError("Coefficient: block holds too many oscillations to tabulate");
    }
    if (!blk.abs_table) {
      blk.abs_table = std::make_unique<AbsTable>();
      blk.abs_table->origin = blk.desc.a;
      blk.abs_table->cell = cell;
    }
    AbsTable& table = *blk.abs_table;
    const QuadratureOptions cell_opts{1e-14, 1e-9, 30, 10'000'000};
    auto integrand = [this](double t) { return eval_abs_dev(t); };
    while (table.prefix.size() <= static_cast<size_t>(cells)) {
      const size_t i = table.prefix.size() - 1;
      const double c_lo = table.origin + static_cast<double>(i) * cell;
      const double c_hi = finite_b ? std::min(c_lo + cell, blk.desc.b) : c_lo + cell;
      const double inc = c_hi > c_lo ? integrate(integrand, c_lo, c_hi, cell_opts) : 0.0;
      table.prefix.push_back(table.prefix.back() + inc);
      if (finite_b && c_hi >= blk.desc.b) break;
    }

    auto cell_index = [&](double t) {
      const long long raw = static_cast<long long>(std::floor((t - table.origin) / cell));
      return std::clamp(raw, static_cast<long long>(0),
                        static_cast<long long>(table.prefix.size()) - 1);
    };
    auto cell_start = [&](long long i) { return table.origin + static_cast<double>(i) * cell; };
    const long long i_lo = cell_index(lo);
    const long long i_hi = cell_index(hi);
    if (i_lo == i_hi) {
      return hi > lo ? integrate(integrand, lo, hi, cell_opts) : 0.0;
    }
    double total = integrate(integrand, lo, cell_start(i_lo + 1), cell_opts);
    total += table.prefix[static_cast<size_t>(i_hi)] - table.prefix[static_cast<size_t>(i_lo + 1)];
    total += integrate(integrand, cell_start(i_hi), hi, cell_opts);
    return total;
  }
};

double Coefficient::value(double t) const {
  const Impl& im = *impl_;
  size_t idx;
  const Impl::Block* blk = im.find_block(t, &idx);
  if (!blk) return im.c_inf;
  return dgcs_eval(blk->desc.m, blk->desc.lambda, blk->eps, t, blk->desc.m * blk->desc.lambda * t, 0)
      .c;
}

double Coefficient::deriv1(double t) const {
  const Impl& im = *impl_;
  size_t idx;
  const Impl::Block* blk = im.find_block(t, &idx);
  if (!blk) return 0.0;
  return dgcs_eval(blk->desc.m, blk->desc.lambda, blk->eps, t, blk->desc.m * blk->desc.lambda * t, 1)
      .c1;
}

double Coefficient::deriv2(double t) const {
  const Impl& im = *impl_;
  size_t idx;
  const Impl::Block* blk = im.find_block(t, &idx);
  if (!blk) return 0.0;
  return dgcs_eval(blk->desc.m, blk->desc.lambda, blk->eps, t, blk->desc.m * blk->desc.lambda * t, 2)
      .c2;
}

PhasePoint Coefficient::eval_exact(double t) const {
  const Impl& im = *impl_;
  size_t idx;
  const Impl::Block* blk = im.find_block(t, &idx);
  if (!blk) return {im.c_inf, 0.0, 0.0};
  const DgcsEval e =
      dgcs_eval(blk->desc.m, blk->desc.lambda, blk->eps, t, blk->desc.m * blk->desc.lambda * t, 2);
  return {e.c, e.c1, e.c2};
}

PhasePoint Coefficient::eval_phase(size_t block_index, double tau, double phi) const {
  const Impl& im = *impl_;
  const auto& blk = *im.block_list.at(block_index);
  const DgcsEval e = dgcs_eval(blk.desc.m, blk.desc.lambda, blk.eps, tau, phi, 2);
  return {e.c, e.c1, e.c2};
}

bool Coefficient::in_block(double t, size_t* index) const {
  return impl_->find_block(t, index) != nullptr;
}

CoeffKind Coefficient::kind() const { return impl_->coeff_kind; }
double Coefficient::domain_start() const { return impl_->domain_start; }
double Coefficient::c_inf() const { return impl_->c_inf; }
double Coefficient::upper_bound() const { return impl_->upper; }
double Coefficient::lower_bound() const { return impl_->lower; }
TailKind Coefficient::tail_kind() const { return impl_->tail; }
const std::vector<BlockDesc>& Coefficient::blocks() const { return impl_->descs; }

double Coefficient::tail_upper(double t) const {
  const Impl& im = *impl_;
  if (im.tail == TailKind::unknown) {
    throw VerificationImpossibleError("Coefficient: no tail metadata for this modulation");
  }
  if (im.tail == TailKind::divergent) return std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (const auto& blk : im.block_list) {
    if (blk->desc.b <= t) continue;
    if (blk->desc.a >= t) {
      total += im.block_mass_upper(*blk);
    } else {
      total += im.block_mass_upper(*blk) - im.env_integral(*blk).upto(t);
    }
  }
  return total;
}

double Coefficient::abs_dev_upper(double t1, double t2) const {
  const Impl& im = *impl_;
  if (t2 < t1) std::swap(t1, t2);
  double total = 0.0;
  for (const auto& blk : im.block_list) {
    const double lo = std::max(t1, blk->desc.a);
    const double hi = std::min(t2, blk->desc.b);
    if (hi <= lo) continue;
    total += im.env_integral(*blk).between(lo, hi);
  }
  return total;
}

double Coefficient::abs_dev_integral(double t1, double t2) const {
  const Impl& im = *impl_;
  if (t2 < t1) std::swap(t1, t2);
  double total = 0.0;
  for (const auto& blk : im.block_list) {
    const double lo = std::max(t1, blk->desc.a);
    const double hi = std::min(t2, blk->desc.b);
    if (hi <= lo) continue;
    total += im.table_query(*blk, lo, hi);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Factories

namespace {

void finalize_bounds(Coefficient::Impl& im);

std::shared_ptr<Coefficient::Impl> base_impl(CoeffKind kind, double domain_start, double c_inf) {
  auto im = std::make_shared<Coefficient::Impl>();
  im->coeff_kind = kind;
  im->domain_start = domain_start;
  im->c_inf = c_inf;
  im->upper = c_inf;
  im->lower = c_inf;
  return im;
}

void add_block(Coefficient::Impl& im, BlockDesc desc, SmoothFunction eps) {
  auto blk = std::make_unique<Coefficient::Impl::Block>();
  blk->desc = desc;
  blk->eps = std::move(eps);
  im.block_list.push_back(std::move(blk));
  im.descs.push_back(desc);
}

void finalize_bounds(Coefficient::Impl& im) {
  double dev = 0.0;
  for (const auto& blk : im.block_list) {
    const double lo = blk->desc.a;
    const double hi = std::isfinite(blk->desc.b) ? blk->desc.b : lo + 1000.0;
    for (int i = 0; i <= 2048; ++i) {
      const double t = lo + (hi - lo) * i / 2048.0;
      dev = std::max(dev, dgcs_envelope(blk->desc.m, blk->desc.lambda, blk->eps, t));
    }
  }
  im.upper = im.c_inf + 1.02 * dev;
  im.lower = im.c_inf - 1.02 * dev;
}

}  // namespace

Coefficient make_constant(double c_inf) {
  if (!(c_inf > 0.0)) throw PreconditionError("make_constant: need c_inf > 0");
  return Coefficient(base_impl(CoeffKind::constant, -std::numeric_limits<double>::infinity(),
                               c_inf));
}

Coefficient make_no_way() {
  auto im = base_impl(CoeffKind::no_way, 1.0, 1.0);
  im->tail = TailKind::divergent;
  BlockDesc d;
  d.m = 1.0;
  d.lambda = 1.0;
  d.a = 1.0;
  d.b = std::numeric_limits<double>::infinity();
  d.serializable = true;
  SmoothFunction eps(
      [](double t) { return 1.0 / t; }, [](double t) { return -1.0 / (t * t); },
      [](double t) { return 2.0 / (t * t * t); }, [](double t) { return -6.0 / (t * t * t * t); });
  add_block(*im, d, std::move(eps));
  finalize_bounds(*im);
  return Coefficient(std::move(im));
}

Coefficient make_dgcs(double m, double lambda, const SmoothFunction& eps, double domain_start) {
  if (!(m > 0.0) || !(lambda > 0.0)) throw PreconditionError("make_dgcs: need m, lambda > 0");
  if (eps.max_order() < 1) throw PreconditionError("make_dgcs: eps must be once differentiable");
  auto im = base_impl(CoeffKind::dgcs, domain_start, m * m);
  im->tail = TailKind::unknown;  // generic modulation carries no decay metadata
  BlockDesc d;
  d.m = m;
  d.lambda = lambda;
  d.a = domain_start;
  d.b = std::numeric_limits<double>::infinity();
  add_block(*im, d, eps);
  finalize_bounds(*im);
  return Coefficient(std::move(im));
}

Coefficient make_dgcs(double m, double lambda, double eps_const, double domain_start) {
  if (!(m > 0.0) || !(lambda > 0.0)) throw PreconditionError("make_dgcs: need m, lambda > 0");
  auto im = base_impl(CoeffKind::dgcs, domain_start, m * m);
  im->tail = eps_const == 0.0 ? TailKind::zero : TailKind::divergent;
  BlockDesc d;
  d.m = m;
  d.lambda = lambda;
  d.a = domain_start;
  d.b = std::numeric_limits<double>::infinity();
  d.eps_is_constant = true;
  d.eps_value = eps_const;
  d.serializable = true;
  add_block(*im, d, SmoothFunction::constant(eps_const));
  finalize_bounds(*im);
  return Coefficient(std::move(im));
}

Coefficient make_dgcs(double m, double lambda, const Modulation& mod) {
  if (!(m > 0.0) || !(lambda > 0.0)) throw PreconditionError("make_dgcs: need m, lambda > 0");
  auto im = base_impl(CoeffKind::dgcs, mod.theta.a(), m * m);
  im->tail = TailKind::zero;
  BlockDesc d;
  d.m = m;
  d.lambda = lambda;
  d.a = mod.theta.a();
  d.b = mod.theta.b();
  d.ramp_width = mod.theta.ramp_width();
  d.eps0 = mod.eps0;
  add_block(*im, d, mod.as_function());
  finalize_bounds(*im);
  return Coefficient(std::move(im));
}

Coefficient glue_blocks(double c_inf, double domain_start,
                        std::vector<std::pair<BlockDesc, SmoothFunction>> blocks) {
  auto im = base_impl(CoeffKind::glued, domain_start, c_inf);
  im->tail = TailKind::zero;
  double prev_b = domain_start;
  for (auto& [desc, eps] : blocks) {
    if (desc.a < prev_b) throw PreconditionError("glue_blocks: blocks must be disjoint and sorted");
    if (!std::isfinite(desc.b)) throw PreconditionError("glue_blocks: blocks must be bounded");
    if (std::abs(desc.m * desc.m - c_inf) > 1e-12 * c_inf) {
      throw PreconditionError("glue_blocks: block base speed must match c_inf");
    }
    prev_b = desc.b;
    add_block(*im, desc, std::move(eps));
  }
  finalize_bounds(*im);
  return Coefficient(std::move(im));
}

// ---------------------------------------------------------------------------
// Membership and the computation bound

MembershipReport verify_membership(const Coefficient& coeff, const rates::RateProfile& profile,
                                   const rates::ClassParams& params, double horizon, int grid_n) {
  if (coeff.domain_start() > params.t0) {
    throw VerificationImpossibleError("verify_membership: coefficient domain starts after t0");
  }
  MembershipReport rep;
  const double t0 = params.t0;

  // Grid: clustered base grid plus dense coverage of every block.
  std::vector<double> times;
  times.reserve(static_cast<size_t>(grid_n) + coeff.blocks().size() * 300);
  for (int i = 0; i <= grid_n; ++i) {
    const double s = static_cast<double>(i) / grid_n;
    times.push_back(t0 + (horizon - t0) * s * s);
  }
  for (const auto& d : coeff.blocks()) {
    const double lo = std::max(d.a, t0);
    const double hi = std::min(std::isfinite(d.b) ? d.b : horizon, horizon);
    if (hi <= lo) continue;
    for (int i = 0; i <= 256; ++i) times.push_back(lo + (hi - lo) * i / 256.0);
    for (int i = 0; i <= 32; ++i) {
      times.push_back(std::min(lo + d.ramp_width * i / 32.0, hi));
      times.push_back(std::max(hi - d.ramp_width * i / 32.0, lo));
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  double margin_hyp = std::numeric_limits<double>::infinity();
  double margin_der = std::numeric_limits<double>::infinity();
  constexpr int kPhases = 64;

  for (double t : times) {
    const double gam = profile.gamma(t);
    size_t idx;
    if (coeff.in_block(t, &idx)) {
      for (int p = 0; p < kPhases; ++p) {
        const double phi = 2.0 * kPi * p / kPhases;
        const PhasePoint e = coeff.eval_phase(idx, t, phi);
        margin_hyp = std::min({margin_hyp, e.c - params.lambda1, params.lambda2 - e.c});
        margin_der = std::min({margin_der, gam - std::abs(e.c1), gam * gam - std::abs(e.c2)});
      }
    }
    const PhasePoint e = coeff.eval_exact(t);
    margin_hyp = std::min({margin_hyp, e.c - params.lambda1, params.lambda2 - e.c});
    margin_der = std::min({margin_der, gam - std::abs(e.c1), gam * gam - std::abs(e.c2)});
  }
  rep.margin_hyp = margin_hyp;
  rep.margin_der = margin_der;
  rep.hyperbolicity = margin_hyp >= 0.0;
  rep.derivative_bounds = margin_der >= 0.0;

  double margin_stab = std::numeric_limits<double>::infinity();
  const int stab_n = std::min(grid_n, 512);
  for (int i = 0; i <= stab_n; ++i) {
    const double s = static_cast<double>(i) / stab_n;
    const double t = t0 + (horizon - t0) * s * s;
    margin_stab = std::min(margin_stab, profile.stab(t) - coeff.tail_upper(t));
  }
  rep.margin_stab = margin_stab;
  rep.stabilization = margin_stab >= 0.0;
  return rep;
}

Gamma3Result computation_bound_check(const Coefficient& coeff, const SmoothFunction& g,
                                     double lambda, double eps0, double m, int envelope_n,
                                     int phase_n) {
  Gamma3Result out;
  if (coeff.blocks().empty()) throw PreconditionError("computation_bound_check: no block");
  const BlockDesc& d = coeff.blocks().front();
  const double lo = d.a;
  const double hi = std::isfinite(d.b) ? d.b : d.a + 100.0;

  std::vector<double> taus;
  taus.reserve(static_cast<size_t>(envelope_n) + 130);
  for (int i = 0; i <= envelope_n; ++i) taus.push_back(lo + (hi - lo) * i / envelope_n);
  for (int i = 0; i <= 64; ++i) {
    taus.push_back(std::min(lo + d.ramp_width * i / 64.0, hi));
    taus.push_back(std::max(hi - d.ramp_width * i / 64.0, lo));
  }

  double worst = 0.0;
  bool finite = true;
  for (double tau : taus) {
    const double denom = eps0 * g(tau);
    if (!(denom > 1e-300)) continue;
    for (int p = 0; p < phase_n; ++p) {
      const double phi = 2.0 * kPi * p / phase_n;
      const PhasePoint e = coeff.eval_phase(0, tau, phi);
      const double q = std::max({lambda * lambda * std::abs(e.c - m * m),
                                 lambda * std::abs(e.c1), std::abs(e.c2)});
      const double ratio = q / denom;
      if (!std::isfinite(ratio)) finite = false;
      worst = std::max(worst, ratio);
    }
  }
  out.gamma3_empirical = worst;
  out.pass = finite;
  return out;
}

}  // namespace wavegec::coefficients
