#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "waning/errors.hpp"

namespace waning {

/**
 * Normalized reinfection profile over immune age.
 *
 * Two forms are supported. The waning form is flat at 1 - eta until the onset
 * age tau_hat and then relaxes exponentially (rate gamma_w) towards 1. The
 * tabulated form linearly interpolates user-supplied values and is held
 * constant past the last node.
 *
 * cumulative(tau) is the exact integral of value() over [0, tau].
 */
class ImmunityKernel
{
 public:
  static ImmunityKernel waning(double eta, double gamma_w, double tau_hat)
  {
    ImmunityKernel k;
    k.eta_ = eta;
    k.gamma_w_ = gamma_w;
    k.tau_hat_ = tau_hat;
    return k;
  }

  static ImmunityKernel tabulated(std::vector<double> ages, std::vector<double> values)
  {
    if (ages.size() != values.size() || ages.empty())
      throw ParameterError("kernel", "kernel table needs matching, non-empty age and value lists");
    if (ages.front() != 0.0)
      throw ParameterError("kernel", "kernel table must start at age 0");
    for (std::size_t i = 1; i < ages.size(); ++i)
      if (!(ages[i] > ages[i - 1]))
        throw ParameterError("kernel", "kernel table ages must be strictly increasing");
    auto t = std::make_shared<Table>();
    t->ages = std::move(ages);
    t->values = std::move(values);
    t->cumulative.assign(t->ages.size(), 0.0);
    for (std::size_t i = 1; i < t->ages.size(); ++i)
      t->cumulative[i] = t->cumulative[i - 1]
                         + 0.5 * (t->values[i] + t->values[i - 1]) * (t->ages[i] - t->ages[i - 1]);
    ImmunityKernel k;
    k.table_ = std::move(t);
    return k;
  }

  bool is_tabulated() const { return static_cast<bool>(table_); }

  double eta() const { return eta_; }
  double gamma_w() const { return gamma_w_; }
  double tau_hat() const { return tau_hat_; }
  const std::vector<double>& table_ages() const { return table_->ages; }
  const std::vector<double>& table_values() const { return table_->values; }

  double value(double tau) const
  {
    if (table_) {
      const auto& a = table_->ages;
      const auto& v = table_->values;
      if (tau >= a.back())
        return v.back();
      const auto i = interval(tau);
      const double s = (tau - a[i]) / (a[i + 1] - a[i]);
      return v[i] + s * (v[i + 1] - v[i]);
    }
    if (tau < tau_hat_)
      return 1.0 - eta_;
    return 1.0 - eta_ * std::exp(-gamma_w_ * (tau - tau_hat_));
  }

  double cumulative(double tau) const
  {
    if (table_) {
      const auto& a = table_->ages;
      const auto& v = table_->values;
      if (tau >= a.back())
        return table_->cumulative.back() + v.back() * (tau - a.back());
      const auto i = interval(tau);
      const double h = tau - a[i];
      const double slope = (v[i + 1] - v[i]) / (a[i + 1] - a[i]);
      return table_->cumulative[i] + v[i] * h + 0.5 * slope * h * h;
    }
    if (tau < tau_hat_)
      return (1.0 - eta_) * tau;
    const double s = tau - tau_hat_;
    return (1.0 - eta_) * tau_hat_ + s - (eta_ / gamma_w_) * (-std::expm1(-gamma_w_ * s));
  }

  /// Onset age of the age dependence (tau_hat, or the last table node).
  double onset_age() const { return table_ ? table_->ages.back() : tau_hat_; }

  /// Age past which the kernel equals its supremum to double precision.
  double saturation_age() const
  {
    if (table_)
      return table_->ages.back();
    if (eta_ == 0.0 || gamma_w_ <= 0.0)
      return tau_hat_;
    return tau_hat_ + 40.0 / gamma_w_;
  }

  /// Ages in (0, tau_end) where the kernel has a derivative discontinuity.
  std::vector<double> breakpoints(double tau_end) const
  {
    std::vector<double> out;
    if (table_) {
      for (double a : table_->ages)
        if (a > 0.0 && a < tau_end)
          out.push_back(a);
    }
    else if (tau_hat_ > 0.0 && tau_hat_ < tau_end) {
      out.push_back(tau_hat_);
    }
    return out;
  }

  /// Throws ParameterError unless the kernel lies in (0, 1] and is non-decreasing.
  void validate() const
  {
    if (table_) {
      const auto& v = table_->values;
      if (!(v.front() > 0.0))
        throw ParameterError("kernel", "kernel not strictly positive at tau=0");
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0 && v[i] <= 1.0))
          throw ParameterError("kernel", "kernel table value out of (0, 1]");
        if (i > 0 && v[i] < v[i - 1])
          throw ParameterError("kernel", "kernel table must be non-decreasing");
      }
      return;
    }
    if (!(eta_ < 1.0))
      throw ParameterError("eta", "kernel not strictly positive at tau=0");
    if (!(eta_ >= 0.0))
      throw ParameterError("eta", "eta out of range");
    if (!(gamma_w_ > 0.0))
      throw ParameterError("gamma_w", "gamma_w must be positive");
    if (!(tau_hat_ >= 0.0))
      throw ParameterError("tau_hat", "tau_hat must be non-negative");
  }

 private:
  struct Table
  {
    std::vector<double> ages;
    std::vector<double> values;
    std::vector<double> cumulative;
  };

  std::size_t interval(double tau) const
  {
    const auto& a = table_->ages;
    auto it = std::upper_bound(a.begin(), a.end(), tau);
    return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - a.begin()) - 1));
  }

  double eta_ = 0.0;
  double gamma_w_ = 1.0;
  double tau_hat_ = 0.0;
  std::shared_ptr<const Table> table_;
};

}  // namespace waning
