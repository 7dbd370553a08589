#include <pdcbo/problems/problem.hpp>

#include <stdexcept>

namespace pdcbo::problems {

UniformContextGenerator::UniformContextGenerator(Box z_box) : _box(std::move(z_box))
{
    if (!box_valid(_box))
        throw std::invalid_argument("context box must be non-empty and finite");
}

Vector UniformContextGenerator::draw(Rng& rng) const
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector z(static_cast<Index>(_box.size()));
    for (std::size_t i = 0; i < _box.size(); ++i)
        z(Index(i)) = _box[i].lo + _box[i].width() * unit(rng);
    return z;
}

PriceContextGenerator::PriceContextGenerator(Vector nominal, double alpha) : _nominal(std::move(nominal)), _alpha(alpha)
{
    if (_nominal.size() == 0 || (_nominal.array() <= 0.0).any())
        throw std::invalid_argument("nominal prices must be positive");
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("price perturbation alpha must lie in [0, 1)");
    for (Index i = 0; i < _nominal.size(); ++i)
        _box.push_back({(1.0 - alpha) * _nominal(i), (1.0 + alpha) * _nominal(i)});
}

Vector PriceContextGenerator::draw(Rng& rng) const
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector p(_nominal.size());
    for (Index i = 0; i < p.size(); ++i)
        p(i) = _alpha == 0.0 ? _nominal(i) : _box[std::size_t(i)].lo + _box[std::size_t(i)].width() * unit(rng);
    return p;
}

ContextSequence::ContextSequence(std::shared_ptr<const ContextGenerator> gen, std::uint64_t seed)
    : _gen(std::move(gen)), _rng(seed)
{
    if (!_gen)
        throw std::invalid_argument("context sequence needs a generator");
}

Vector ContextSequence::next() { return _gen->draw(_rng); }

std::vector<Vector> ContextSequence::take(std::size_t n)
{
    std::vector<Vector> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(next());
    return out;
}

ContextSequence uniform_context_gen(const Box& z_box, std::uint64_t seed)
{
    return ContextSequence(std::make_shared<UniformContextGenerator>(z_box), seed);
}

ContextSequence price_context_gen(const Vector& nominal, double alpha, std::uint64_t seed)
{
    return ContextSequence(std::make_shared<PriceContextGenerator>(nominal, alpha), seed);
}

ProblemInstance::ProblemInstance(Box theta_box,
                                 std::shared_ptr<const ContextGenerator> context_gen,
                                 Index n_constraints,
                                 double noise_sigma)
    : _theta_box(std::move(theta_box)), _context_gen(std::move(context_gen)), _n_constraints(n_constraints),
      _noise_sigma(noise_sigma)
{
    if (!box_valid(_theta_box))
        throw std::invalid_argument("parameter box must be non-empty and finite");
    if (!_context_gen)
        throw std::invalid_argument("problem needs a context generator");
    if (n_constraints < 1)
        throw std::invalid_argument("problem needs at least one constraint");
    if (!(noise_sigma >= 0.0))
        throw std::invalid_argument("noise sigma must be non-negative");
}

std::vector<TrueValues> ProblemInstance::evaluate_grid(const Matrix& thetas, const Vector& z) const
{
    std::vector<TrueValues> out;
    out.reserve(static_cast<std::size_t>(thetas.cols()));
    for (Index j = 0; j < thetas.cols(); ++j)
        out.push_back(evaluate(thetas.col(j), z));
    return out;
}

FunctionProblem::FunctionProblem(std::string name,
                                 Box theta_box,
                                 std::shared_ptr<const ContextGenerator> context_gen,
                                 Oracle objective,
                                 std::vector<Oracle> constraints,
                                 double noise_sigma,
                                 std::optional<Vector> safe_seed)
    : ProblemInstance(std::move(theta_box), std::move(context_gen), static_cast<Index>(constraints.size()), noise_sigma),
      _name(std::move(name)), _objective(std::move(objective)), _constraints(std::move(constraints)),
      _safe_seed(std::move(safe_seed))
{
}

TrueValues FunctionProblem::evaluate(const Vector& theta, const Vector& z) const
{
    TrueValues out;
    out.f = _objective(theta, z);
    out.g.resize(static_cast<Index>(_constraints.size()));
    for (std::size_t i = 0; i < _constraints.size(); ++i)
        out.g(Index(i)) = _constraints[i](theta, z);
    return out;
}

std::shared_ptr<FunctionProblem> make_smoke_problem(double noise_sigma)
{
    auto contexts = std::make_shared<UniformContextGenerator>(Box{{0.0, 0.0}});
    return std::make_shared<FunctionProblem>(
        "smoke", Box{{-1.0, 1.0}}, contexts, [](const Vector& th, const Vector&) { return th(0) * th(0); },
        std::vector<FunctionProblem::Oracle>{[](const Vector& th, const Vector&) { return th(0) - 10.0; }},
        noise_sigma, Vector::Zero(1));
}

} // namespace pdcbo::problems
