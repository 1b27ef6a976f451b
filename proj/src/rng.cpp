#include "fvnn/rng.hpp"

namespace fvnn {

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t state = splitmix64(base);
    for (auto key : keys) state = splitmix64(state ^ splitmix64(key + 0x632be59bd9b4e019ULL));
    return state;
}

Matrix standard_normal(Rng& rng, Index rows, Index cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix out(rows, cols);
    // Row-major fill order so that the first k rows do not depend on the total row count.
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
    return out;
}

Matrix random_orthogonal(Rng& rng, Index n) {
    Matrix g = standard_normal(rng, n, n);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < n; ++j)
        if (r(j, j) < 0) q.col(j) *= -1.0;
    return q;
}

}  // namespace fvnn
