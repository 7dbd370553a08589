#pragma once

#include <pdcbo/common.hpp>
#include <pdcbo/rng.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pdcbo::problems {

/// Noise-free objective and constraint values at one (theta, z).
struct TrueValues {
    double f = 0.0;
    Vector g;
};

class ContextGenerator {
public:
    virtual ~ContextGenerator() = default;
    virtual Vector draw(Rng& rng) const = 0;
    virtual const Box& box() const = 0;
};

/// i.i.d. uniform draws over a box.
class UniformContextGenerator final : public ContextGenerator {
public:
    explicit UniformContextGenerator(Box z_box);
    Vector draw(Rng& rng) const override;
    const Box& box() const override { return _box; }

private:
    Box _box;
};

/// Component-wise uniform draws in [(1 - alpha) p_i, (1 + alpha) p_i].
class PriceContextGenerator final : public ContextGenerator {
public:
    PriceContextGenerator(Vector nominal, double alpha);
    Vector draw(Rng& rng) const override;
    const Box& box() const override { return _box; }
    const Vector& nominal() const { return _nominal; }
    double alpha() const { return _alpha; }

private:
    Vector _nominal;
    double _alpha;
    Box _box;
};

/// Seeded stream of contexts z_1, z_2, ...
class ContextSequence {
public:
    ContextSequence(std::shared_ptr<const ContextGenerator> gen, std::uint64_t seed);
    Vector next();
    std::vector<Vector> take(std::size_t n);

private:
    std::shared_ptr<const ContextGenerator> _gen;
    Rng _rng;
};

ContextSequence uniform_context_gen(const Box& z_box, std::uint64_t seed);
ContextSequence price_context_gen(const Vector& nominal, double alpha, std::uint64_t seed);

/**
 * Black-box problem min_theta f(theta, z) s.t. g_i(theta, z) <= 0 over compact boxes.
 * Oracles are deterministic; observation noise is added by the caller.
 */
class ProblemInstance {
public:
    virtual ~ProblemInstance() = default;

    virtual std::string name() const = 0;
    virtual TrueValues evaluate(const Vector& theta, const Vector& z) const = 0;

    /// Evaluates every column of thetas at one context.
    virtual std::vector<TrueValues> evaluate_grid(const Matrix& thetas, const Vector& z) const;

    /// A parameter known feasible for all contexts, if the problem provides one.
    virtual std::optional<Vector> declared_safe_seed() const { return std::nullopt; }

    /// Whether oracle solutions may be cached at nearby contexts.
    virtual bool lipschitz_in_z() const { return false; }

    const Box& theta_box() const { return _theta_box; }
    const Box& z_box() const { return _context_gen->box(); }
    Index n_theta() const { return static_cast<Index>(_theta_box.size()); }
    Index n_z() const { return static_cast<Index>(z_box().size()); }
    Index n_constraints() const { return _n_constraints; }
    double noise_sigma() const { return _noise_sigma; }

    ContextSequence contexts(std::uint64_t seed) const { return ContextSequence(_context_gen, seed); }
    const std::shared_ptr<const ContextGenerator>& context_generator() const { return _context_gen; }

protected:
    ProblemInstance(Box theta_box,
                    std::shared_ptr<const ContextGenerator> context_gen,
                    Index n_constraints,
                    double noise_sigma);

private:
    Box _theta_box;
    std::shared_ptr<const ContextGenerator> _context_gen;
    Index _n_constraints;
    double _noise_sigma;
};

using ProblemPtr = std::shared_ptr<const ProblemInstance>;

/// Problem assembled from plain callables; used for closed-form test problems.
class FunctionProblem final : public ProblemInstance {
public:
    using Oracle = std::function<double(const Vector& theta, const Vector& z)>;

    FunctionProblem(std::string name,
                    Box theta_box,
                    std::shared_ptr<const ContextGenerator> context_gen,
                    Oracle objective,
                    std::vector<Oracle> constraints,
                    double noise_sigma,
                    std::optional<Vector> safe_seed = std::nullopt);

    std::string name() const override { return _name; }
    TrueValues evaluate(const Vector& theta, const Vector& z) const override;
    std::optional<Vector> declared_safe_seed() const override { return _safe_seed; }

private:
    std::string _name;
    Oracle _objective;
    std::vector<Oracle> _constraints;
    std::optional<Vector> _safe_seed;
};

/// f = theta^2, g = theta - 10 on [-1, 1] with a single fixed context z = 0.
std::shared_ptr<FunctionProblem> make_smoke_problem(double noise_sigma = 0.0);

} // namespace pdcbo::problems
