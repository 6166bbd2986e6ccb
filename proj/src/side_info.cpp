#include "sbmlab/side_info.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sbmlab/rng.hpp"

namespace sbmlab {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void validate_distribution(const std::vector<double>& dist) {
  if (dist.empty()) throw std::invalid_argument("feature distribution is empty");
  double sum = 0.0;
  for (double v : dist) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("feature probabilities must be nonnegative and finite");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("feature distribution must sum to 1");
  }
}

std::uint32_t draw(const std::vector<double>& dist, Rng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (std::size_t m = 0; m < dist.size(); ++m) {
    acc += dist[m];
    if (u < acc) return static_cast<std::uint32_t>(m);
  }
  // Rounding left u above the final partial sum; take the last positive cell.
  for (std::size_t m = dist.size(); m-- > 0;) {
    if (dist[m] > 0.0) return static_cast<std::uint32_t>(m);
  }
  return 0;
}

}  // namespace

void validate(const SideInfoModel& model) {
  std::visit(overloaded{
                 [](const NoisyLabels& m) {
                   if (!(m.alpha > 0.0 && m.alpha < 0.5)) {
                     throw std::invalid_argument("noisy labels: alpha must lie in (0, 0.5)");
                   }
                 },
                 [](const Erasure& m) {
                   if (!(m.epsilon > 0.0 && m.epsilon < 1.0)) {
                     throw std::invalid_argument("erasure: epsilon must lie in (0, 1)");
                   }
                 },
                 [](const Features& m) {
                   if (m.laws.empty()) throw std::invalid_argument("features: K must be >= 1");
                   for (const auto& law : m.laws) {
                     if (law.plus.size() != law.minus.size()) {
                       throw std::invalid_argument("features: conditional laws differ in size");
                     }
                     validate_distribution(law.plus);
                     validate_distribution(law.minus);
                   }
                 },
             },
             model);
}

std::string model_tag(const SideInfoModel& model) {
  return std::visit(overloaded{
                        [](const NoisyLabels&) { return std::string("noisy"); },
                        [](const Erasure&) { return std::string("erasure"); },
                        [](const Features&) { return std::string("features"); },
                    },
                    model);
}

Features uninformative_features() { return Features{{FeatureLaw{{1.0}, {1.0}}}}; }

bool is_sign_symmetric(const SideInfoModel& model) {
  const auto* f = std::get_if<Features>(&model);
  if (f == nullptr) return false;
  for (const auto& law : f->laws) {
    if (law.plus != law.minus) return false;
  }
  return true;
}

std::size_t SideInfoObservation::size() const {
  return num_features == 0 ? y.size() : outcomes.size() / num_features;
}

SideInfoObservation sample_side_info(const LabelVector& labels, const SideInfoModel& model,
                                     std::uint64_t seed) {
  validate(model);
  Rng rng(seed);
  SideInfoObservation obs;
  const std::size_t n = labels.size();
  std::visit(overloaded{
                 [&](const NoisyLabels& m) {
                   obs.y.resize(n);
                   for (std::size_t i = 0; i < n; ++i) {
                     obs.y[i] = rng.bernoulli(m.alpha) ? static_cast<std::int8_t>(-labels[i])
                                                       : labels[i];
                   }
                 },
                 [&](const Erasure& m) {
                   obs.y.resize(n);
                   for (std::size_t i = 0; i < n; ++i) {
                     obs.y[i] = rng.bernoulli(m.epsilon) ? std::int8_t{0} : labels[i];
                   }
                 },
                 [&](const Features& m) {
                   obs.num_features = m.laws.size();
                   obs.outcomes.resize(n * obs.num_features);
                   for (std::size_t i = 0; i < n; ++i) {
                     for (std::size_t k = 0; k < obs.num_features; ++k) {
                       const auto& law = m.laws[k];
                       obs.outcomes[i * obs.num_features + k] =
                           draw(labels[i] == 1 ? law.plus : law.minus, rng);
                     }
                   }
                 },
             },
             model);
  return obs;
}

int Llr::sign() const {
  switch (state) {
    case State::plus_certain:
      return 1;
    case State::minus_certain:
      return -1;
    case State::finite:
      break;
  }
  return (value > 0.0) - (value < 0.0);
}

LlrVector llr(const SideInfoModel& model, const SideInfoObservation& observation) {
  validate(model);
  LlrVector out;
  std::visit(
      overloaded{
          [&](const NoisyLabels& m) {
            if (observation.num_features != 0) throw std::invalid_argument("llr: shape mismatch");
            out.c = std::log((1.0 - m.alpha) / m.alpha);
            out.hbar.reserve(observation.y.size());
            for (auto y : observation.y) {
              if (y != 1 && y != -1) throw std::invalid_argument("llr: noisy label must be +/-1");
              out.hbar.push_back(Llr::finite(out.c * y));
            }
          },
          [&](const Erasure&) {
            if (observation.num_features != 0) throw std::invalid_argument("llr: shape mismatch");
            out.hbar.reserve(observation.y.size());
            for (auto y : observation.y) {
              switch (y) {
                case 1:
                  out.hbar.push_back(Llr::plus_certain());
                  break;
                case -1:
                  out.hbar.push_back(Llr::minus_certain());
                  break;
                case 0:
                  out.hbar.push_back(Llr::finite(0.0));
                  break;
                default:
                  throw std::invalid_argument("llr: erasure value must be +1, 0 or -1");
              }
            }
          },
          [&](const Features& m) {
            if (observation.num_features != m.laws.size()) {
              throw std::invalid_argument("llr: feature count mismatch");
            }
            const std::size_t n = observation.size();
            out.hbar.reserve(n);
            for (std::size_t i = 0; i < n; ++i) {
              double sum = 0.0;
              bool plus = false;
              bool minus = false;
              for (std::size_t k = 0; k < m.laws.size(); ++k) {
                const auto& law = m.laws[k];
                const auto o = observation.outcome(i, k);
                if (o >= law.plus.size()) throw std::invalid_argument("llr: outcome out of range");
                const double ap = law.plus[o];
                const double am = law.minus[o];
                if (ap == 0.0 && am == 0.0) {
                  throw std::invalid_argument("llr: outcome impossible under both labels");
                }
                if (am == 0.0) {
                  plus = true;
                } else if (ap == 0.0) {
                  minus = true;
                } else {
                  sum += std::log(ap / am);
                }
              }
              if (plus && minus) {
                throw std::invalid_argument("llr: observation impossible under both labels");
              }
              out.hbar.push_back(plus    ? Llr::plus_certain()
                                 : minus ? Llr::minus_certain()
                                         : Llr::finite(sum));
            }
          },
      },
      model);
  return out;
}

}  // namespace sbmlab
