#pragma once

#include <Eigen/Dense>
#include <vector>

namespace zinpaint {

// Principal subspace of a sample set: mean, the top-D orthonormal directions
// (columns, descending eigenvalue) and the eigenvalues themselves. The sign
// of each direction is fixed so its largest-magnitude coefficient is
// positive, which makes refits bit-identical.
struct pca_model {
    Eigen::VectorXd mean;
    Eigen::MatrixXd components;  // input_dim x dims
    Eigen::VectorXd eigenvalues;

    int input_dim() const { return static_cast<int>(mean.size()); }
    int dims() const { return static_cast<int>(components.cols()); }

    // y = components^T (x - mean)
    void project(const double* x, double* y) const;
};

// Streaming covariance fit: feed every sample twice, first through the mean
// pass, then through the covariance pass. Keeps memory at one chunk even for
// dictionaries of millions of patches.
class pca_accumulator {
public:
    explicit pca_accumulator(int input_dim);

    void add_mean_chunk(const Eigen::Ref<const Eigen::MatrixXd>& rows);
    void finish_mean();
    void add_covariance_chunk(Eigen::MatrixXd rows);  // consumes the chunk
    pca_model finalize(int dims);

    const Eigen::VectorXd& mean() const { return mean_; }

private:
    int input_dim_;
    long count_ = 0;
    bool mean_done_ = false;
    Eigen::VectorXd sum_;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
};

pca_model fit_pca(const Eigen::Ref<const Eigen::MatrixXd>& samples, int dims);
pca_model fit_pca(const std::vector<std::vector<double>>& samples, int dims);

}  // namespace zinpaint
