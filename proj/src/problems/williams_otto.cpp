#include <pdcbo/problems/williams_otto.hpp>

#include <Eigen/LU>

#include <bit>
#include <cmath>
#include <sstream>

namespace pdcbo::problems {

namespace {
    using Jacobian = Eigen::Matrix<double, 6, 6>;

    struct Rates {
        double k1, k2, k3;
    };

    Rates rate_constants(double temperature, const WilliamsOttoConstants& c)
    {
        const double kelvin = temperature + 273.15;
        return {c.pre_exponential[0] * std::exp(-c.activation[0] / kelvin),
                c.pre_exponential[1] * std::exp(-c.activation[1] / kelvin),
                c.pre_exponential[2] * std::exp(-c.activation[2] / kelvin)};
    }

    MassFractions residual(const MassFractions& x, double feed_b, const Rates& k, const WilliamsOttoConstants& c)
    {
        const double w = c.holdup;
        const double fr = c.feed_a + feed_b;
        const double r1 = w * k.k1 * x[A] * x[B];
        const double r2 = w * k.k2 * x[B] * x[C];
        const double r3 = w * k.k3 * x[C] * x[P];
        MassFractions res;
        res[A] = c.feed_a - fr * x[A] - r1;
        res[B] = feed_b - fr * x[B] - r1 - r2;
        res[C] = -fr * x[C] + 2.0 * r1 - 2.0 * r2 - r3;
        res[P] = -fr * x[P] + r2 - 0.5 * r3;
        res[E] = -fr * x[E] + 2.0 * r2;
        res[G] = -fr * x[G] + 1.5 * r3;
        return res;
    }

    Jacobian jacobian(const MassFractions& x, double feed_b, const Rates& k, const WilliamsOttoConstants& c)
    {
        const double w = c.holdup;
        const double fr = c.feed_a + feed_b;
        // partial derivatives of the three reaction rates
        Eigen::Matrix<double, 3, 6> dr = Eigen::Matrix<double, 3, 6>::Zero();
        dr(0, A) = w * k.k1 * x[B];
        dr(0, B) = w * k.k1 * x[A];
        dr(1, B) = w * k.k2 * x[C];
        dr(1, C) = w * k.k2 * x[B];
        dr(2, C) = w * k.k3 * x[P];
        dr(2, P) = w * k.k3 * x[C];

        // stoichiometry of each balance in (r1, r2, r3)
        Eigen::Matrix<double, 6, 3> nu;
        nu << -1, 0, 0,
              -1, -1, 0,
              2, -2, -1,
              0, 1, -0.5,
              0, 2, 0,
              0, 0, 1.5;
        Jacobian jac = nu * dr;
        jac.diagonal().array() -= fr;
        return jac;
    }

    double max_abs(const MassFractions& r) { return r.cwiseAbs().maxCoeff(); }
} // namespace

MassFractions cstr_balance_residual(const MassFractions& x,
                                    double feed_b,
                                    double temperature,
                                    const WilliamsOttoConstants& constants)
{
    return residual(x, feed_b, rate_constants(temperature, constants), constants);
}

SteadyState cstr_steady_state(double feed_b, double temperature, const WilliamsOttoConstants& constants)
{
    if (!(feed_b > 0.0) || !std::isfinite(temperature))
        throw std::invalid_argument("cstr_steady_state: feed rate must be positive and temperature finite");
    const Rates k = rate_constants(temperature, constants);
    const double fr = constants.feed_a + feed_b;

    // Start from the unreacted feed and march in pseudo-time: each step solves
    // (holdup/dt I - J) dx = R, which becomes a plain Newton step as dt grows.
    MassFractions x = MassFractions::Zero();
    x[A] = constants.feed_a / fr;
    x[B] = feed_b / fr;
    MassFractions res = residual(x, feed_b, k, constants);
    double norm = res.norm();
    double inv_dt = fr / constants.holdup; // one residence time

    int it = 0;
    for (; it < kSteadyStateMaxIterations && max_abs(res) > kSteadyStateTolerance; ++it) {
        Jacobian lhs = -jacobian(x, feed_b, k, constants);
        lhs.diagonal().array() += constants.holdup * inv_dt;
        const MassFractions step = lhs.partialPivLu().solve(res);

        // backtrack on the residual norm
        double damping = 1.0;
        MassFractions trial = x + step;
        MassFractions trial_res = residual(trial, feed_b, k, constants);
        while (trial_res.norm() > norm && damping > 1e-4) {
            damping *= 0.5;
            trial = x + damping * step;
            trial_res = residual(trial, feed_b, k, constants);
        }
        if (trial_res.norm() > norm) {
            // no descent: fall back towards explicit time stepping
            inv_dt *= 8.0;
            continue;
        }
        x = trial;
        res = trial_res;
        norm = res.norm();
        inv_dt = damping == 1.0 ? inv_dt * 0.1 : inv_dt;
    }

    const double final_res = max_abs(res);
    if (!(final_res <= kSteadyStateTolerance)) {
        std::ostringstream msg;
        msg << "steady state did not converge at F_B=" << feed_b << ", T_r=" << temperature << " (residual "
            << final_res << " after " << it << " iterations)";
        throw SolverError(msg.str(), final_res);
    }
    if (x.minCoeff() < -1e-9) {
        std::ostringstream msg;
        msg << "negative mass fraction " << x.minCoeff() << " at F_B=" << feed_b << ", T_r=" << temperature;
        throw ModelDomainError(msg.str());
    }
    return {x, final_res, it};
}

double wo_objective(const SteadyState& state, double feed_b, const Vector& prices, const WilliamsOttoConstants& constants)
{
    if (prices.size() != 4)
        throw std::invalid_argument("wo_objective: expected 4 prices (P, E, A, B)");
    const double fr = constants.feed_a + feed_b;
    const double profit = prices(0) * fr * state.x[P] + prices(1) * fr * state.x[E] - prices(2) * constants.feed_a
        - prices(3) * feed_b;
    return -profit;
}

double wo_objective(double feed_b, double temperature, const Vector& prices, const WilliamsOttoConstants& constants)
{
    return wo_objective(cstr_steady_state(feed_b, temperature, constants), feed_b, prices, constants);
}

Vector williams_otto_nominal_prices()
{
    Vector p(4);
    p << 1143.38, 25.92, 76.23, 114.34;
    return p;
}

std::size_t WilliamsOttoInstance::KeyHash::operator()(const std::pair<double, double>& k) const
{
    const auto a = std::bit_cast<std::uint64_t>(k.first);
    const auto b = std::bit_cast<std::uint64_t>(k.second);
    return std::hash<std::uint64_t>{}(a ^ (b * 0x9e3779b97f4a7c15ULL));
}

WilliamsOttoInstance::WilliamsOttoInstance(Vector nominal_prices,
                                           double alpha,
                                           double noise_sigma,
                                           WilliamsOttoConstants constants,
                                           const Lattice* precompute)
    : ProblemInstance(parameter_box(), std::make_shared<PriceContextGenerator>(nominal_prices, alpha), 2, noise_sigma),
      _constants(constants), _nominal(std::move(nominal_prices)), _alpha(alpha)
{
    if (_nominal.size() != 4)
        throw std::invalid_argument("Williams-Otto needs 4 nominal prices");

    // high feed of B at low temperature: low X_G and X_A below its limit
    _safe_seed = Vector(2);
    _safe_seed << 7.0, 75.0;
    const SteadyState seed_state = cstr_steady_state(_safe_seed(0), _safe_seed(1), _constants);
    if (seed_state.x[A] > kXaThreshold || seed_state.x[G] > kXgThreshold)
        throw std::logic_error("Williams-Otto safe seed is infeasible under the configured constants");

    if (precompute != nullptr) {
        if (precompute->dim() != 2)
            throw std::invalid_argument("Williams-Otto precompute lattice must be 2-dimensional");
        for (Index j = 0; j < precompute->size(); ++j) {
            const Vector th = precompute->point(j);
            _cache.emplace(std::make_pair(th(0), th(1)), cstr_steady_state(th(0), th(1), _constants));
        }
    }
}

SteadyState WilliamsOttoInstance::steady_state(const Vector& theta) const
{
    if (theta.size() != 2)
        throw std::invalid_argument("Williams-Otto parameters are (F_B, T_r)");
    if (auto it = _cache.find({theta(0), theta(1)}); it != _cache.end())
        return it->second;
    return cstr_steady_state(theta(0), theta(1), _constants);
}

TrueValues WilliamsOttoInstance::evaluate(const Vector& theta, const Vector& z) const
{
    const SteadyState state = steady_state(theta);
    TrueValues out;
    out.f = wo_objective(state, theta(0), z, _constants);
    out.g.resize(2);
    out.g << state.x[A] - kXaThreshold, state.x[G] - kXgThreshold;
    return out;
}

} // namespace pdcbo::problems
