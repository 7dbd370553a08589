#include <pdcbo/problems/gp_sampled.hpp>

#include <random>
#include <stdexcept>

namespace pdcbo::problems {

namespace {
    Box joint_box(const Box& theta_box, const Box& z_box)
    {
        Box joint = theta_box;
        joint.insert(joint.end(), z_box.begin(), z_box.end());
        return joint;
    }
} // namespace

GpSampledInstance::GpSampledInstance(gp::KernelSpecd kernel,
                                     Box theta_box,
                                     Box z_box,
                                     Index n_constraints,
                                     std::uint64_t seed,
                                     std::vector<Index> grid_resolution,
                                     double noise_sigma)
    : ProblemInstance(theta_box, std::make_shared<UniformContextGenerator>(z_box), n_constraints, noise_sigma),
      _kernel(std::move(kernel)), _seed(seed)
{
    const Box joint = joint_box(theta_box, z_box);
    if (_kernel.dim() != static_cast<Index>(joint.size()))
        throw std::invalid_argument("sampling kernel dimension must equal n_theta + n_z");
    if (grid_resolution.size() == 1)
        grid_resolution.assign(joint.size(), grid_resolution.front());
    for (Index r : grid_resolution)
        if (r < 2)
            throw std::invalid_argument("anchor grid resolution must be >= 2 per dimension");
    _anchors = Lattice(joint, grid_resolution);

    const Matrix& pts = _anchors.points();
    const auto factor = gp::jittered_cholesky<double>(gp::kernel_matrix(_kernel, pts, pts));

    const Index n_fn = n_constraints + 1;
    _anchor_values.resize(n_fn, pts.cols());
    _interpolants.reserve(static_cast<std::size_t>(n_fn));
    for (Index fn = 0; fn < n_fn; ++fn) {
        Rng rng(derive_seed(seed, Stream::Anchor, {static_cast<std::uint64_t>(fn)}));
        std::normal_distribution<double> normal(0.0, 1.0);
        Vector eps(pts.cols());
        for (Index j = 0; j < eps.size(); ++j)
            eps(j) = normal(rng);
        const Vector values = factor.lower * eps;
        _anchor_values.row(fn) = values.transpose();

        gp::GpPosteriord interp(_kernel, kAnchorInterpolationNoise);
        interp.condition(pts, values);
        _interpolants.push_back(std::move(interp));
    }
}

TrueValues GpSampledInstance::evaluate(const Vector& theta, const Vector& z) const
{
    const Vector x = join_input(theta, z);
    TrueValues out;
    out.g.resize(n_constraints());
    out.f = _interpolants[0].predict_mean(x)(0);
    for (Index i = 0; i < n_constraints(); ++i)
        out.g(i) = _interpolants[std::size_t(i + 1)].predict_mean(x)(0);
    return out;
}

std::vector<TrueValues> GpSampledInstance::evaluate_grid(const Matrix& thetas, const Vector& z) const
{
    Matrix x(thetas.rows() + z.size(), thetas.cols());
    x.topRows(thetas.rows()) = thetas;
    x.bottomRows(z.size()) = z.replicate(1, thetas.cols());

    std::vector<Vector> values;
    for (const auto& interp : _interpolants)
        values.push_back(interp.predict_mean(x));

    std::vector<TrueValues> out(static_cast<std::size_t>(thetas.cols()));
    for (Index j = 0; j < thetas.cols(); ++j) {
        auto& tv = out[std::size_t(j)];
        tv.f = values[0](j);
        tv.g.resize(n_constraints());
        for (Index i = 0; i < n_constraints(); ++i)
            tv.g(i) = values[std::size_t(i + 1)](j);
    }
    return out;
}

double GpSampledInstance::rkhs_norm(Index fn) const
{
    const auto& interp = _interpolants.at(std::size_t(fn));
    const Matrix gram = gp::kernel_matrix(_kernel, interp.inputs(), interp.inputs());
    const Vector a = interp.alpha();
    return std::sqrt(std::max(0.0, a.dot(gram * a)));
}

std::shared_ptr<GpSampledInstance> sample_gp_instance(const gp::KernelSpecd& kernel,
                                                      const Box& theta_box,
                                                      const Box& z_box,
                                                      Index n_constraints,
                                                      std::uint64_t seed,
                                                      const std::vector<Index>& grid_resolution,
                                                      double noise_sigma)
{
    return std::make_shared<GpSampledInstance>(kernel, theta_box, z_box, n_constraints, seed, grid_resolution,
                                               noise_sigma);
}

} // namespace pdcbo::problems
