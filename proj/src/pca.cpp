#include "zinpaint/pca.hpp"

#include <stdexcept>

namespace zinpaint {

void pca_model::project(const double* x, double* y) const {
    const Eigen::Map<const Eigen::VectorXd> xv(x, mean.size());
    Eigen::Map<Eigen::VectorXd> yv(y, components.cols());
    yv.noalias() = components.transpose() * (xv - mean);
}

pca_accumulator::pca_accumulator(int input_dim)
    : input_dim_(input_dim),
      sum_(Eigen::VectorXd::Zero(input_dim)),
      cov_(Eigen::MatrixXd::Zero(input_dim, input_dim)) {
    if (input_dim < 1) throw std::invalid_argument("pca: input dimension must be positive");
}

void pca_accumulator::add_mean_chunk(const Eigen::Ref<const Eigen::MatrixXd>& rows) {
    if (rows.cols() != input_dim_) throw std::invalid_argument("pca: sample length mismatch");
    sum_ += rows.colwise().sum().transpose();
    count_ += rows.rows();
}

void pca_accumulator::finish_mean() {
    if (count_ == 0) throw std::invalid_argument("pca: no samples");
    mean_ = sum_ / static_cast<double>(count_);
    mean_done_ = true;
}

void pca_accumulator::add_covariance_chunk(Eigen::MatrixXd rows) {
    if (!mean_done_) throw std::logic_error("pca: covariance pass before mean pass");
    if (rows.cols() != input_dim_) throw std::invalid_argument("pca: sample length mismatch");
    rows.rowwise() -= mean_.transpose();
    cov_.selfadjointView<Eigen::Lower>().rankUpdate(rows.transpose());
}

pca_model pca_accumulator::finalize(int dims) {
    if (!mean_done_) finish_mean();
    if (dims < 1 || dims > input_dim_)
        throw std::invalid_argument("pca: dims must be in [1, input_dim]");
    if (count_ < dims) throw std::invalid_argument("pca: fewer samples than requested dims");

    Eigen::MatrixXd cov = cov_.selfadjointView<Eigen::Lower>();
    if (count_ > 1) cov /= static_cast<double>(count_ - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw std::runtime_error("pca: eigensolver failed");

    pca_model model;
    model.mean = mean_;
    model.components.resize(input_dim_, dims);
    model.eigenvalues.resize(dims);
    // Eigen reports ascending eigenvalues; keep the top `dims`, descending.
    for (int j = 0; j < dims; ++j) {
        const int src = input_dim_ - 1 - j;
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        int arg = 0;
        for (int i = 1; i < input_dim_; ++i)
            if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
        if (v[arg] < 0) v = -v;
        model.components.col(j) = v;
        model.eigenvalues[j] = std::max(0.0, solver.eigenvalues()[src]);
    }
    return model;
}

pca_model fit_pca(const Eigen::Ref<const Eigen::MatrixXd>& samples, int dims) {
    pca_accumulator acc(static_cast<int>(samples.cols()));
    acc.add_mean_chunk(samples);
    acc.finish_mean();
    acc.add_covariance_chunk(samples);
    return acc.finalize(dims);
}

pca_model fit_pca(const std::vector<std::vector<double>>& samples, int dims) {
    if (samples.empty()) throw std::invalid_argument("pca: no samples");
    Eigen::MatrixXd m(static_cast<long>(samples.size()), static_cast<long>(samples[0].size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].size() != samples[0].size())
            throw std::invalid_argument("pca: ragged samples");
        for (std::size_t j = 0; j < samples[i].size(); ++j)
            m(static_cast<long>(i), static_cast<long>(j)) = samples[i][j];
    }
    return fit_pca(m, dims);
}

}  // namespace zinpaint
