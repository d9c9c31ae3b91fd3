#include "kramers/potential.hpp"

#include <cmath>
#include <sstream>

#include "kramers/config.hpp"
#include "kramers/rng.hpp"

namespace kramers {

void ScalarPotential::hessian(std::span<const double>, Eigen::MatrixXd&) const {
  throw UnsupportedError("potential has no hessian: " + describe());
}

double ScalarPotential::value1(double q) const {
  return value(std::span<const double>(&q, 1));
}

double ScalarPotential::grad1(double q) const {
  double g;
  gradient(std::span<const double>(&q, 1), std::span<double>(&g, 1));
  return g;
}

namespace {

class ZeroPotential final : public ScalarPotential {
 public:
  using ScalarPotential::ScalarPotential;
  PotentialKind kind() const override { return PotentialKind::Zero; }
  double value(std::span<const double>) const override { return 0.0; }
  void gradient(std::span<const double>, std::span<double> out) const override {
    for (double& g : out) g = 0.0;
  }
  void hessian(std::span<const double>, Eigen::MatrixXd& out) const override {
    out = Eigen::MatrixXd::Zero(dim(), dim());
  }
  double value1(double) const override { return 0.0; }
  double grad1(double) const override { return 0.0; }
  std::optional<double> gradient_lipschitz() const override { return 0.0; }
  std::string describe() const override { return "zero"; }
  void serialize(Config& cfg, const std::string& section) const override {
    cfg.set(section, "kind", ConfigValue::make_string("zero"));
  }
};

class QuadraticPotential final : public ScalarPotential {
 public:
  QuadraticPotential(Domain domain, Eigen::MatrixXd k)
      : ScalarPotential(domain), k_(std::move(k)) {
    if (k_.rows() != dim() || k_.cols() != dim()) {
      throw ValidationError("quadratic potential: stiffness shape mismatch");
    }
    if ((k_ - k_.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(1.0, k_.cwiseAbs().maxCoeff())) {
      throw ValidationError("quadratic potential: stiffness not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k_);
    if (es.eigenvalues().minCoeff() < -1e-12) {
      throw ValidationError("quadratic potential: stiffness not PSD");
    }
    lipschitz_ = es.eigenvalues().cwiseAbs().maxCoeff();
    if (domain.is_torus()) {
      throw ValidationError("quadratic potential does not descend to the torus");
    }
  }
  PotentialKind kind() const override { return PotentialKind::Quadratic; }
  double value(std::span<const double> q) const override {
    Eigen::Map<const Eigen::VectorXd> x(q.data(), q.size());
    return 0.5 * x.dot(k_ * x);
  }
  void gradient(std::span<const double> q, std::span<double> out) const override {
    Eigen::Map<const Eigen::VectorXd> x(q.data(), q.size());
    Eigen::Map<Eigen::VectorXd> g(out.data(), out.size());
    g = k_ * x;
  }
  void hessian(std::span<const double>, Eigen::MatrixXd& out) const override {
    out = k_;
  }
  double value1(double q) const override { return 0.5 * k_(0, 0) * q * q; }
  double grad1(double q) const override { return k_(0, 0) * q; }
  std::optional<double> gradient_lipschitz() const override { return lipschitz_; }
  std::string describe() const override { return "quadratic"; }
  void serialize(Config& cfg, const std::string& section) const override {
    cfg.set(section, "kind", ConfigValue::make_string("quadratic"));
    std::vector<double> flat(k_.size());
    for (int i = 0; i < k_.rows(); ++i)
      for (int j = 0; j < k_.cols(); ++j) flat[i * k_.cols() + j] = k_(i, j);
    cfg.set(section, "stiffness", ConfigValue::make_list(std::move(flat)));
  }
  const Eigen::MatrixXd& stiffness() const { return k_; }

 private:
  Eigen::MatrixXd k_;
  double lipschitz_ = 0.0;
};

class CosinePotential final : public ScalarPotential {
 public:
  CosinePotential(Domain domain, Eigen::VectorXd a, std::optional<double> period)
      : ScalarPotential(domain), a_(std::move(a)) {
    if (a_.size() != dim()) {
      throw ValidationError("cosine potential: amplitude count mismatch");
    }
    if (period) {
      period_ = *period;
    } else if (domain.is_torus()) {
      period_ = domain.length;
    } else {
      throw ValidationError("cosine potential on R^d needs an explicit period");
    }
    if (!(period_ > 0.0)) throw ValidationError("cosine potential: period <= 0");
    omega_ = 2.0 * M_PI / period_;
  }
  PotentialKind kind() const override { return PotentialKind::Cosine; }
  double value(std::span<const double> q) const override {
    double v = 0.0;
    for (int i = 0; i < dim(); ++i) v += a_(i) * std::cos(omega_ * q[i]);
    return v;
  }
  void gradient(std::span<const double> q, std::span<double> out) const override {
    for (int i = 0; i < dim(); ++i) {
      out[i] = -a_(i) * omega_ * std::sin(omega_ * q[i]);
    }
  }
  void hessian(std::span<const double> q, Eigen::MatrixXd& out) const override {
    out = Eigen::MatrixXd::Zero(dim(), dim());
    for (int i = 0; i < dim(); ++i) {
      out(i, i) = -a_(i) * omega_ * omega_ * std::cos(omega_ * q[i]);
    }
  }
  double value1(double q) const override { return a_(0) * std::cos(omega_ * q); }
  double grad1(double q) const override {
    return -a_(0) * omega_ * std::sin(omega_ * q);
  }
  std::optional<double> gradient_lipschitz() const override {
    return a_.cwiseAbs().maxCoeff() * omega_ * omega_;
  }
  std::string describe() const override { return "cosine"; }
  void serialize(Config& cfg, const std::string& section) const override {
    cfg.set(section, "kind", ConfigValue::make_string("cosine"));
    cfg.set(section, "amplitudes",
            ConfigValue::make_list({a_.data(), a_.data() + a_.size()}));
    cfg.set(section, "period", ConfigValue::make_number(period_));
  }
  const Eigen::VectorXd& amplitudes() const { return a_; }
  double period() const { return period_; }

 private:
  Eigen::VectorXd a_;
  double period_ = 0.0;
  double omega_ = 0.0;
};

class DoubleWellPotential final : public ScalarPotential {
 public:
  explicit DoubleWellPotential(Domain domain) : ScalarPotential(domain) {
    if (domain.is_torus()) {
      throw ValidationError("double-well potential does not descend to the torus");
    }
  }
  PotentialKind kind() const override { return PotentialKind::DoubleWell; }
  double value(std::span<const double> q) const override {
    double v = 0.0;
    for (double qi : q) {
      const double w = qi * qi - 1.0;
      v += w * w;
    }
    return v;
  }
  void gradient(std::span<const double> q, std::span<double> out) const override {
    for (std::size_t i = 0; i < q.size(); ++i) {
      out[i] = 4.0 * q[i] * (q[i] * q[i] - 1.0);
    }
  }
  void hessian(std::span<const double> q, Eigen::MatrixXd& out) const override {
    out = Eigen::MatrixXd::Zero(dim(), dim());
    for (int i = 0; i < dim(); ++i) out(i, i) = 12.0 * q[i] * q[i] - 4.0;
  }
  std::optional<double> gradient_lipschitz() const override { return std::nullopt; }
  std::string describe() const override { return "double_well"; }
  void serialize(Config& cfg, const std::string& section) const override {
    cfg.set(section, "kind", ConfigValue::make_string("double_well"));
  }
};

class SumPotential final : public ScalarPotential {
 public:
  explicit SumPotential(std::vector<PotentialPtr> terms)
      : ScalarPotential(terms.at(0)->domain()), terms_(std::move(terms)) {
    for (const auto& t : terms_) {
      if (t->dim() != dim()) throw ValidationError("sum potential: dim mismatch");
    }
  }
  PotentialKind kind() const override { return PotentialKind::Sum; }
  double value(std::span<const double> q) const override {
    double v = 0.0;
    for (const auto& t : terms_) v += t->value(q);
    return v;
  }
  void gradient(std::span<const double> q, std::span<double> out) const override {
    std::vector<double> tmp(q.size());
    for (double& g : out) g = 0.0;
    for (const auto& t : terms_) {
      t->gradient(q, tmp);
      for (std::size_t i = 0; i < q.size(); ++i) out[i] += tmp[i];
    }
  }
  bool has_hessian() const override {
    for (const auto& t : terms_) {
      if (!t->has_hessian()) return false;
    }
    return true;
  }
  void hessian(std::span<const double> q, Eigen::MatrixXd& out) const override {
    out = Eigen::MatrixXd::Zero(dim(), dim());
    Eigen::MatrixXd tmp;
    for (const auto& t : terms_) {
      t->hessian(q, tmp);
      out += tmp;
    }
  }
  std::optional<double> gradient_lipschitz() const override {
    double total = 0.0;
    for (const auto& t : terms_) {
      auto l = t->gradient_lipschitz();
      if (!l) return std::nullopt;
      total += *l;
    }
    return total;
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "sum(";
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (i) os << "+";
      os << terms_[i]->describe();
    }
    os << ")";
    return os.str();
  }
  void serialize(Config& cfg, const std::string& section) const override {
    cfg.set(section, "kind", ConfigValue::make_string("sum"));
    cfg.set(section, "terms",
            ConfigValue::make_number(static_cast<double>(terms_.size())));
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      terms_[i]->serialize(cfg, section + ".term" + std::to_string(i));
    }
  }
  const std::vector<PotentialPtr>& terms() const { return terms_; }

 private:
  std::vector<PotentialPtr> terms_;
};

}  // namespace

PotentialPtr make_zero_potential(Domain domain) {
  return std::make_shared<ZeroPotential>(domain);
}

PotentialPtr make_quadratic_potential(Domain domain, Eigen::MatrixXd stiffness) {
  return std::make_shared<QuadraticPotential>(domain, std::move(stiffness));
}

PotentialPtr make_cosine_potential(Domain domain, Eigen::VectorXd amplitudes,
                                   std::optional<double> period) {
  return std::make_shared<CosinePotential>(domain, std::move(amplitudes), period);
}

PotentialPtr make_double_well_potential(Domain domain) {
  return std::make_shared<DoubleWellPotential>(domain);
}

PotentialPtr make_sum_potential(std::vector<PotentialPtr> terms) {
  if (terms.empty()) throw ValidationError("sum potential: no terms");
  return std::make_shared<SumPotential>(std::move(terms));
}

KineticEnergy KineticEnergy::quadratic(int dim, Eigen::MatrixXd mass) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mass);
  if (mass.rows() != dim || mass.cols() != dim ||
      es.eigenvalues().minCoeff() <= 0.0) {
    throw ValidationError("kinetic energy: mass matrix must be SPD");
  }
  KineticEnergy ke;
  ke.mass_ = mass;
  ke.mass_inv_ = mass.inverse();
  ke.u_ = make_quadratic_potential(Domain::euclidean(dim), ke.mass_inv_);
  return ke;
}

KineticEnergy KineticEnergy::from_potential(PotentialPtr u) {
  if (!u) throw ValidationError("kinetic energy: null potential");
  KineticEnergy ke;
  ke.u_ = std::move(u);
  return ke;
}

const Eigen::MatrixXd& KineticEnergy::mass() const {
  if (!mass_) throw UnsupportedError("kinetic energy is not quadratic");
  return *mass_;
}

const Eigen::MatrixXd& KineticEnergy::mass_inverse() const {
  if (!mass_) throw UnsupportedError("kinetic energy is not quadratic");
  return mass_inv_;
}

bool KineticEnergy::is_even(int n_samples, std::uint64_t seed) const {
  CounterStream stream(seed, StreamPurpose::BurnIn, 0);
  const int d = dim();
  std::vector<double> p(d), neg(d);
  for (int s = 0; s < n_samples; ++s) {
    stream.normals(static_cast<std::uint32_t>(s), 0, p);
    for (int i = 0; i < d; ++i) neg[i] = -p[i];
    const double a = value(p);
    const double b = value(neg);
    if (std::abs(a - b) > 1e-10 * std::max(1.0, std::abs(a))) return false;
  }
  return true;
}

}  // namespace kramers
