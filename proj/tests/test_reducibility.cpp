#include <doctest.h>

#include "mcrkit/error.hpp"
#include "mcrkit/random.hpp"
#include "mcrkit/reducibility.hpp"

#include <algorithm>
#include <numeric>

using namespace mcr;

namespace {

Matrix m3(std::initializer_list<double> v) {
    Matrix m(3, 3);
    auto it = v.begin();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = *it++;
    return m;
}

// (I + |pattern|)^(n-1) entrywise positive, in integer arithmetic.
bool brute_force_irreducible(const Matrix& m) {
    const int n = static_cast<int>(m.rows());
    Eigen::MatrixXi b(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b(i, j) = (i == j || m(i, j) != 0.0) ? 1 : 0;
    Eigen::MatrixXi p = Eigen::MatrixXi::Identity(n, n);
    for (int k = 0; k < n - 1; ++k) p = (p * b).unaryExpr([](int x) { return x > 0 ? 1 : 0; });
    return (p.array() > 0).all();
}

Matrix permute(const Matrix& m, const std::vector<int>& perm) {
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(perm[i], perm[j]);
    return out;
}

}  // namespace

TEST_CASE("reference verdicts") {
    const Matrix lower = m3({1, 0, 0, 2, 3, 4, 5, 6, 7});
    IrreducibilityResult r = is_irreducible(lower);
    CHECK_FALSE(r.irreducible);
    CHECK(r.components == std::vector<std::vector<int>>{{0}, {1, 2}});

    r = is_irreducible(Matrix::Identity(3, 3));
    CHECK_FALSE(r.irreducible);
    CHECK(r.components.size() == 3);

    r = is_irreducible(m3({0, 1, 0, 0, 0, 1, 1, 0, 0}));
    CHECK(r.irreducible);
    CHECK(r.components == std::vector<std::vector<int>>{{0, 1, 2}});
}

TEST_CASE("nonzero digraph construction") {
    NonzeroDigraph g = adjacency_from_nonzeros(Matrix::Identity(3, 3));
    CHECK(g.n == 3);
    CHECK(g.edges == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}, {2, 2}});

    g = adjacency_from_nonzeros(Matrix::Constant(3, 3, 0.5));
    CHECK(g.edges.size() == 9);

    g = adjacency_from_nonzeros(m3({1, 0, 0, 2, 3, 4, 5, 6, 7}));
    CHECK(g.out[0] == std::vector<int>{0});
    CHECK(g.edges.size() == 7);

    const Matrix small = m3({1, 1e-12, 0, 0, 1, 1e-12, 1e-12, 0, 1});
    CHECK(is_irreducible(small).irreducible);
    CHECK_FALSE(is_irreducible(small, 1e-9).irreducible);

    CHECK_THROWS_AS(adjacency_from_nonzeros(Matrix::Ones(2, 3)), InputError);
    CHECK_THROWS_AS(is_irreducible(Matrix::Ones(3, 2)), InputError);
    CHECK_THROWS_AS(adjacency_from_nonzeros(Matrix::Ones(2, 2), -1.0), InputError);
}

TEST_CASE("agreement with the brute-force oracle on random 4x4 patterns") {
    Xoshiro256 rng(77);
    int irreducible = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        Matrix m(4, 4);
        const double density = 0.2 + 0.5 * rng.uniform();
        for (auto& x : m.reshaped()) x = rng.uniform() < density ? 1.0 + rng.uniform() : 0.0;
        const bool expect = brute_force_irreducible(m);
        const IrreducibilityResult r = is_irreducible(m);
        CHECK(r.irreducible == expect);
        CHECK((r.components.size() == 1) == expect);
        irreducible += expect ? 1 : 0;
    }
    // both verdicts are exercised
    CHECK(irreducible > 50);
    CHECK(irreducible < 950);
}

TEST_CASE("verdict is invariant under permutation and transposition") {
    Xoshiro256 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + trial % 6;
        Matrix m(n, n);
        for (auto& x : m.reshaped()) x = rng.uniform() < 0.35 ? 1.0 : 0.0;
        std::vector<int> perm(static_cast<size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[static_cast<size_t>(rng.uniform() * (i + 1))]);
        const bool base = is_irreducible(m).irreducible;
        CHECK(is_irreducible(permute(m, perm)).irreducible == base);
        CHECK(is_irreducible(Matrix(m.transpose())).irreducible == base);
        CHECK(is_irreducible(m).components.size() == is_irreducible(permute(m, perm)).components.size());
    }
}

TEST_CASE("components partition the nodes") {
    Matrix m = Matrix::Zero(6, 6);
    // two 3-cycles joined one way
    m(0, 1) = m(1, 2) = m(2, 0) = 1;
    m(3, 4) = m(4, 5) = m(5, 3) = 1;
    m(2, 3) = 1;
    const IrreducibilityResult r = is_irreducible(m);
    CHECK_FALSE(r.irreducible);
    CHECK(r.components == std::vector<std::vector<int>>{{0, 1, 2}, {3, 4, 5}});
    m(5, 0) = 1;
    CHECK(is_irreducible(m).irreducible);
}
