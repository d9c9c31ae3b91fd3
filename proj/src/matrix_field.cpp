#include "kramers/matrix_field.hpp"

#include <cmath>
#include <sstream>

#include "kramers/config.hpp"
#include "kramers/linalg.hpp"
#include "kramers/rng.hpp"

namespace kramers {

double MatrixField::value1(double q) const {
  Eigen::MatrixXd m(1, 1);
  value(std::span<const double>(&q, 1), m);
  return m(0, 0);
}

double MatrixField::deriv1(double q) const {
  std::vector<Eigen::MatrixXd> d;
  derivative(std::span<const double>(&q, 1), d);
  return d[0](0, 0);
}

Eigen::VectorXd MatrixField::div_row(std::span<const double> q) const {
  const int d = dim();
  std::vector<Eigen::MatrixXd> dD;
  derivative(q, dD);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < d; ++j) out(k) += dD[j](k, j);
  }
  return out;
}

Eigen::VectorXd div_row(const MatrixField& field, std::span<const double> q) {
  return field.div_row(q);
}

void MatrixField::validate(int n_samples, std::uint64_t seed) const {
  const int d = dim();
  CounterStream stream(seed, StreamPurpose::BurnIn, 1);
  const double md = ellipticity_bound();
  if (md < 1.0) throw ValidationError("ellipticity bound must be >= 1");
  std::vector<double> q(d), qp(d), qm(d);
  Eigen::MatrixXd m, mp, mm;
  std::vector<Eigen::MatrixXd> dD;
  const double span = domain().is_torus() ? domain().length : 4.0;
  for (int s = 0; s < n_samples; ++s) {
    for (int i = 0; i < d; ++i) {
      const double u = stream.uniform(static_cast<std::uint32_t>(s),
                                      static_cast<std::uint32_t>(i));
      q[i] = domain().is_torus() ? u * span : (u - 0.5) * 2.0 * span;
    }
    value(q, m);
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw ValidationError("matrix field not symmetric at sample: " + describe());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo < 1.0 / md - 1e-10 || hi > md + 1e-10) {
      throw ValidationError("ellipticity bound violated at sample: " + describe());
    }
    // Central finite differences of value against the derivative tensor.
    derivative(q, dD);
    const double h = 1e-5;
    for (int k = 0; k < d; ++k) {
      qp = q;
      qm = q;
      qp[k] += h;
      qm[k] -= h;
      value(qp, mp);
      value(qm, mm);
      const Eigen::MatrixXd fd = (mp - mm) / (2.0 * h);
      const double scale = std::max(1.0, dD[k].cwiseAbs().maxCoeff());
      if ((fd - dD[k]).cwiseAbs().maxCoeff() > 1e-6 * scale) {
        throw ValidationError("derivative/finite-difference mismatch: " + describe());
      }
    }
  }
}

namespace {

double bound_from_range(double lo, double hi) {
  if (!(lo > 0.0)) throw ValidationError("matrix field loses definiteness");
  return std::max(hi, 1.0 / lo);
}

class ConstantField final : public MatrixField {
 public:
  ConstantField(Domain domain, Eigen::MatrixXd m)
      : MatrixField(domain), m_(std::move(m)) {
    if (m_.rows() != dim() || m_.cols() != dim()) {
      throw ValidationError("constant field: shape mismatch");
    }
    spd_sqrt(m_);  // SPD check
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_);
    bound_ = bound_from_range(es.eigenvalues().minCoeff(),
                              es.eigenvalues().maxCoeff());
  }
  MatrixFieldKind kind() const override { return MatrixFieldKind::Constant; }
  void value(std::span<const double>, Eigen::MatrixXd& out) const override {
    out = m_;
  }
  void derivative(std::span<const double>,
                  std::vector<Eigen::MatrixXd>& out) const override {
    out.assign(dim(), Eigen::MatrixXd::Zero(dim(), dim()));
  }
  double ellipticity_bound() const override { return bound_; }
  double value1(double) const override { return m_(0, 0); }
  double deriv1(double) const override { return 0.0; }
  std::string describe() const override { return "constant"; }
  void serialize(Config& cfg, const std::string& section) const override {
    cfg.set(section, "kind", ConfigValue::make_string("constant"));
    std::vector<double> flat(m_.size());
    for (int i = 0; i < m_.rows(); ++i)
      for (int j = 0; j < m_.cols(); ++j) flat[i * m_.cols() + j] = m_(i, j);
    cfg.set(section, "matrix", ConfigValue::make_list(std::move(flat)));
  }
  const Eigen::MatrixXd& matrix() const { return m_; }

 private:
  Eigen::MatrixXd m_;
  double bound_ = 1.0;
};

double resolve_period(const Domain& domain, std::optional<double> period) {
  if (period) {
    if (!(*period > 0.0)) throw ValidationError("trig field: period <= 0");
    return *period;
  }
  if (!domain.is_torus()) {
    throw ValidationError("trig field on R^d needs an explicit period");
  }
  return domain.length;
}

class DiagonalTrigField final : public MatrixField {
 public:
  DiagonalTrigField(Domain domain, Eigen::VectorXd a, Eigen::VectorXd b,
                    Eigen::VectorXd c, std::optional<double> period)
      : MatrixField(domain), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
    const int d = dim();
    if (a_.size() != d || b_.size() != d || c_.size() != d) {
      throw ValidationError("diagonal trig field: coefficient count mismatch");
    }
    period_ = resolve_period(domain, period);
    omega_ = 2.0 * M_PI / period_;
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < d; ++i) {
      const double r = std::hypot(b_(i), c_(i));
      if (!(a_(i) > r)) {
        throw ValidationError("diagonal trig field: need a_i > sqrt(b_i^2+c_i^2)");
      }
      lo = std::min(lo, a_(i) - r);
      hi = std::max(hi, a_(i) + r);
    }
    bound_ = bound_from_range(lo, hi);
  }
  MatrixFieldKind kind() const override { return MatrixFieldKind::DiagonalTrig; }
  void value(std::span<const double> q, Eigen::MatrixXd& out) const override {
    const int d = dim();
    out = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) out(i, i) = entry(i, q[i]);
  }
  void derivative(std::span<const double> q,
                  std::vector<Eigen::MatrixXd>& out) const override {
    const int d = dim();
    out.assign(d, Eigen::MatrixXd::Zero(d, d));
    for (int k = 0; k < d; ++k) out[k](k, k) = entry_deriv(k, q[k]);
  }
  double ellipticity_bound() const override { return bound_; }
  double value1(double q) const override { return entry(0, q); }
  double deriv1(double q) const override { return entry_deriv(0, q); }
  std::string describe() const override { return "diagonal_trig"; }
  void serialize(Config& cfg, const std::string& section) const override {
    cfg.set(section, "kind", ConfigValue::make_string("diagonal_trig"));
    cfg.set(section, "offset",
            ConfigValue::make_list({a_.data(), a_.data() + a_.size()}));
    cfg.set(section, "cos_coeff",
            ConfigValue::make_list({b_.data(), b_.data() + b_.size()}));
    cfg.set(section, "sin_coeff",
            ConfigValue::make_list({c_.data(), c_.data() + c_.size()}));
    cfg.set(section, "period", ConfigValue::make_number(period_));
  }
  double period() const { return period_; }
  const Eigen::VectorXd& offset() const { return a_; }
  const Eigen::VectorXd& cos_coeff() const { return b_; }
  const Eigen::VectorXd& sin_coeff() const { return c_; }

 private:
  double entry(int i, double qi) const {
    return a_(i) + b_(i) * std::cos(omega_ * qi) + c_(i) * std::sin(omega_ * qi);
  }
  double entry_deriv(int i, double qi) const {
    return omega_ * (-b_(i) * std::sin(omega_ * qi) + c_(i) * std::cos(omega_ * qi));
  }
  Eigen::VectorXd a_, b_, c_;
  double period_ = 0.0, omega_ = 0.0, bound_ = 1.0;
};

class ConformalField final : public MatrixField {
 public:
  ConformalField(Domain domain, double a, Eigen::VectorXd b, Eigen::VectorXd c,
                 std::optional<double> period)
      : MatrixField(domain), a_(a), b_(std::move(b)), c_(std::move(c)) {
    const int d = dim();
    if (b_.size() != d || c_.size() != d) {
      throw ValidationError("conformal field: coefficient count mismatch");
    }
    period_ = resolve_period(domain, period);
    omega_ = 2.0 * M_PI / period_;
    double radius = 0.0;
    for (int i = 0; i < d; ++i) radius += std::hypot(b_(i), c_(i));
    if (!(a_ > radius)) {
      throw ValidationError("conformal field: offset must dominate oscillation");
    }
    bound_ = bound_from_range(a_ - radius, a_ + radius);
  }
  MatrixFieldKind kind() const override { return MatrixFieldKind::Conformal; }
  void value(std::span<const double> q, Eigen::MatrixXd& out) const override {
    out = scalar(q) * Eigen::MatrixXd::Identity(dim(), dim());
  }
  void derivative(std::span<const double> q,
                  std::vector<Eigen::MatrixXd>& out) const override {
    const int d = dim();
    out.assign(d, Eigen::MatrixXd::Zero(d, d));
    for (int k = 0; k < d; ++k) {
      const double dk =
          omega_ * (-b_(k) * std::sin(omega_ * q[k]) + c_(k) * std::cos(omega_ * q[k]));
      out[k] = dk * Eigen::MatrixXd::Identity(d, d);
    }
  }
  double ellipticity_bound() const override { return bound_; }
  double value1(double q) const override {
    return a_ + b_(0) * std::cos(omega_ * q) + c_(0) * std::sin(omega_ * q);
  }
  double deriv1(double q) const override {
    return omega_ * (-b_(0) * std::sin(omega_ * q) + c_(0) * std::cos(omega_ * q));
  }
  std::string describe() const override { return "conformal"; }
  void serialize(Config& cfg, const std::string& section) const override {
    cfg.set(section, "kind", ConfigValue::make_string("conformal"));
    cfg.set(section, "offset", ConfigValue::make_number(a_));
    cfg.set(section, "cos_coeff",
            ConfigValue::make_list({b_.data(), b_.data() + b_.size()}));
    cfg.set(section, "sin_coeff",
            ConfigValue::make_list({c_.data(), c_.data() + c_.size()}));
    cfg.set(section, "period", ConfigValue::make_number(period_));
  }
  double period() const { return period_; }
  double offset() const { return a_; }
  const Eigen::VectorXd& cos_coeff() const { return b_; }
  const Eigen::VectorXd& sin_coeff() const { return c_; }

 private:
  double scalar(std::span<const double> q) const {
    double v = a_;
    for (int i = 0; i < dim(); ++i) {
      v += b_(i) * std::cos(omega_ * q[i]) + c_(i) * std::sin(omega_ * q[i]);
    }
    return v;
  }
  double a_;
  Eigen::VectorXd b_, c_;
  double period_ = 0.0, omega_ = 0.0, bound_ = 1.0;
};

}  // namespace

MatrixFieldPtr make_constant_field(Domain domain, Eigen::MatrixXd value) {
  return std::make_shared<ConstantField>(domain, std::move(value));
}

MatrixFieldPtr make_diagonal_trig_field(Domain domain, Eigen::VectorXd offset,
                                        Eigen::VectorXd cos_coeff,
                                        Eigen::VectorXd sin_coeff,
                                        std::optional<double> period) {
  return std::make_shared<DiagonalTrigField>(domain, std::move(offset),
                                             std::move(cos_coeff),
                                             std::move(sin_coeff), period);
}

MatrixFieldPtr make_conformal_field(Domain domain, double offset,
                                    Eigen::VectorXd cos_coeff,
                                    Eigen::VectorXd sin_coeff,
                                    std::optional<double> period) {
  return std::make_shared<ConformalField>(domain, offset, std::move(cos_coeff),
                                          std::move(sin_coeff), period);
}

}  // namespace kramers
