#include <doctest.h>

#include <cmath>

#include "home3/data.hpp"
#include "home3/problems.hpp"

using namespace home3;

namespace {

// Central-difference oracle over the flat objective.
double fd_gradient_relative_error(Problem& p, const DenseVector& at,
                                  double h = 1e-6) {
  const DenseVector analytic = p.gradient(at);
  DenseVector fd(at.dim());
  DenseVector probe = at;
  for (std::size_t i = 0; i < at.dim(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + h;
    const double up = p.value(probe);
    probe[i] = orig - h;
    const double down = p.value(probe);
    probe[i] = orig;
    fd[i] = (up - down) / (2.0 * h);
  }
  std::vector<double> diff(at.dim());
  for (std::size_t i = 0; i < at.dim(); ++i) diff[i] = analytic[i] - fd[i];
  return norm2(diff) / std::max(norm2(fd), 1e-12);
}

// Entries bounded away from the ReLU/L1 kinks.
DenseVector smooth_point(std::size_t dim, Rng& rng) {
  DenseVector x(dim);
  for (double& v : x.data) {
    const double mag = rng.next_uniform(0.2, 1.2);
    v = rng.next_unit() < 0.5 ? -mag : mag;
  }
  return x;
}

DenseMatrix random_matrix(std::size_t r, std::size_t c, Rng& rng,
                          double lo = -1.0, double hi = 1.0) {
  DenseMatrix m(r, c);
  for (double& v : m.data) v = rng.next_uniform(lo, hi);
  return m;
}

}  // namespace

TEST_CASE("dictlearn value at a perfect factorization is zero") {
  Rng rng(11);
  const DenseMatrix x = random_matrix(6, 3, rng);
  const DenseMatrix y = random_matrix(3, 8, rng);
  DictLearnProblem p;
  p.input = matmul(x, y);
  p.lambda = 0.0;
  p.dict_rank = 3;
  CHECK(dictlearn_value_and_grad(p, x, y).value == 0.0);
}

TEST_CASE("dictlearn value with zero features is the input norm") {
  Rng rng(12);
  DictLearnProblem p;
  p.input = random_matrix(5, 7, rng);
  p.lambda = 1.0;
  p.dict_rank = 2;
  const DenseMatrix x = random_matrix(5, 2, rng);
  const DenseMatrix y(2, 7, 0.0);
  CHECK(dictlearn_value_and_grad(p, x, y).value == frobenius_norm(p.input));
}

TEST_CASE("dictlearn gradients match central differences at smooth points") {
  DictLearnProblem p;
  p.input = synth_lowrank(12, 15, 3, 31).matrix;
  p.lambda = 0.1;
  p.dict_rank = 3;
  DictLearnObjective obj(std::move(p));
  Rng rng(13);
  for (int pt = 0; pt < 20; ++pt) {
    CHECK(fd_gradient_relative_error(obj, smooth_point(obj.dim(), rng)) <= 1e-5);
  }
}

TEST_CASE("dictlearn reconstruction loss") {
  Rng rng(14);
  const DenseMatrix x = random_matrix(4, 2, rng);
  const DenseMatrix y = random_matrix(2, 6, rng);
  DictLearnProblem p;
  p.input = matmul(x, y);
  p.dict_rank = 2;
  CHECK(reconstruction_loss_dl(p, x, y) == 0.0);

  // zero factorization: ratio of equal norms
  CHECK(reconstruction_loss_dl(p, DenseMatrix(4, 2, 0.0), DenseMatrix(2, 6, 0.0)) ==
        1.0);

  // random case recomputed by definition
  const DenseMatrix x2 = random_matrix(4, 2, rng);
  const DenseMatrix y2 = random_matrix(2, 6, rng);
  const double direct =
      frobenius_norm(sub(p.input, matmul(x2, y2))) / frobenius_norm(p.input);
  CHECK(reconstruction_loss_dl(p, x2, y2) == doctest::Approx(direct).epsilon(1e-12));

  DictLearnProblem zero;
  zero.input = DenseMatrix(2, 2, 0.0);
  zero.dict_rank = 1;
  CHECK_THROWS_AS(reconstruction_loss_dl(zero, DenseMatrix(2, 1, 1.0),
                                         DenseMatrix(1, 2, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("reconstruction loss is invariant under input scaling") {
  Rng rng(15);
  DictLearnProblem p;
  p.input = random_matrix(6, 9, rng);
  p.dict_rank = 2;
  const DenseMatrix x = random_matrix(6, 2, rng);
  const DenseMatrix y = random_matrix(2, 9, rng);
  const double base = reconstruction_loss_dl(p, x, y);

  DictLearnProblem doubled = p;
  doubled.input = scale(p.input, 2.0);
  CHECK(reconstruction_loss_dl(doubled, x, scale(y, 2.0)) == base);

  DictLearnProblem tripled = p;
  tripled.input = scale(p.input, 3.0);
  CHECK(reconstruction_loss_dl(tripled, x, scale(y, 3.0)) ==
        doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("dnmf value is zero when the constraint is satisfied") {
  Rng rng(16);
  DnmfProblem p;
  p.layer_dims = {4, 3};
  p.penalty_mu = 0.0;
  std::vector<DenseMatrix> layers{random_matrix(8, 4, rng), random_matrix(4, 3, rng)};
  const DenseMatrix y = random_matrix(3, 10, rng);
  const DenseMatrix chain = matmul(matmul(layers[0], layers[1]), relu(y));
  p.input = random_matrix(8, 10, rng);
  const DenseMatrix z = sub(p.input, chain);
  CHECK(dnmf_value_and_grad(p, layers, y, z).value <= 1e-12);
}

TEST_CASE("dnmf gradients match central differences at smooth points") {
  DnmfProblem p;
  p.input = synth_lowrank(10, 12, 3, 32).matrix;
  p.layer_dims = {5, 3};
  p.penalty_mu = 1.0;
  DnmfObjective obj(std::move(p));
  Rng rng(17);
  for (int pt = 0; pt < 12; ++pt) {
    CHECK(fd_gradient_relative_error(obj, smooth_point(obj.dim(), rng)) <= 1e-5);
  }
}

TEST_CASE("noisy dnmf gradients match central differences under frozen noise") {
  DnmfProblem p;
  p.input = synth_lowrank(10, 12, 3, 33).matrix;
  p.layer_dims = {5, 3};
  p.noise_amplitude = 0.1;
  DnmfObjective obj(std::move(p));
  Rng rng(18);
  for (int pt = 0; pt < 8; ++pt) {
    const DenseVector at = smooth_point(obj.dim(), rng);
    obj.begin_iteration(static_cast<std::uint64_t>(pt), 123, at);
    CHECK(fd_gradient_relative_error(obj, at) <= 1e-5);
  }
}

TEST_CASE("noisy dnmf evaluation is deterministic per (seed, iteration)") {
  DnmfProblem p;
  p.input = synth_lowrank(8, 9, 2, 34).matrix;
  p.layer_dims = {4, 2};
  p.noise_amplitude = 0.1;
  DnmfObjective obj(std::move(p));
  Rng rng(19);
  const DenseVector at = smooth_point(obj.dim(), rng);

  obj.begin_iteration(5, 42, at);
  const double first = obj.value(at);
  obj.begin_iteration(5, 42, at);
  CHECK(obj.value(at) == first);

  obj.begin_iteration(6, 42, at);
  CHECK(obj.value(at) != first);  // a fresh draw shifts the objective
}

TEST_CASE("single relu layer with positive features reduces to the dictlearn residual") {
  Rng rng(20);
  DnmfProblem p;
  p.input = random_matrix(6, 7, rng);
  p.layer_dims = {3};
  p.penalty_mu = 0.0;
  const DenseMatrix x = random_matrix(6, 3, rng);
  const DenseMatrix y = random_matrix(3, 7, rng, 0.1, 1.0);  // strictly positive
  const DenseMatrix z(6, 7, 0.0);

  DictLearnProblem dl;
  dl.input = p.input;
  dl.lambda = 0.0;
  dl.dict_rank = 3;

  CHECK(dnmf_value_and_grad(p, {x}, y, z).value ==
        dictlearn_value_and_grad(dl, x, y).value);
}

TEST_CASE("dnmf reconstruction loss endpoints") {
  Rng rng(21);
  DnmfProblem p;
  p.input = random_matrix(5, 6, rng);
  p.layer_dims = {3, 2};
  std::vector<DenseMatrix> layers{random_matrix(5, 3, rng), random_matrix(3, 2, rng)};
  const DenseMatrix y = random_matrix(2, 6, rng);
  const DenseMatrix chain = matmul(matmul(layers[0], layers[1]), relu(y));
  const DenseMatrix z = sub(p.input, chain);
  CHECK(reconstruction_loss_dnmf(p, layers, y, z) <= 1e-12);

  // all-zero parameters: the residual is -I
  std::vector<DenseMatrix> zl{DenseMatrix(5, 3, 0.0), DenseMatrix(3, 2, 0.0)};
  CHECK(reconstruction_loss_dnmf(p, zl, DenseMatrix(2, 6, 0.0),
                                 DenseMatrix(5, 6, 0.0)) == 1.0);

  // random case recomputed by definition
  const DenseMatrix y2 = random_matrix(2, 6, rng);
  const DenseMatrix z2 = random_matrix(5, 6, rng);
  const double direct =
      frobenius_norm(sub(add(matmul(matmul(layers[0], layers[1]), relu(y2)), z2),
                         p.input)) /
      frobenius_norm(p.input);
  CHECK(reconstruction_loss_dnmf(p, layers, y2, z2) ==
        doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("inject_noise bound and degenerate median") {
  Rng rng(22);

  DenseMatrix y(20, 20, 10.0);
  const DenseMatrix noisy = inject_noise(y, rng);
  CHECK(noisy.rows == 20);
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    CHECK(noisy.data[i] >= 9.0);
    CHECK(noisy.data[i] <= 11.0);
  }

  DenseMatrix balanced(1, 2);
  balanced(0, 0) = -3.0;
  balanced(0, 1) = 3.0;  // median 0
  const DenseMatrix same = inject_noise(balanced, rng);
  CHECK(same.data == balanced.data);

  DenseMatrix negative(2, 2, -10.0);  // |median| keeps the interval well-formed
  const DenseMatrix shifted = inject_noise(negative, rng);
  for (double v : shifted.data) {
    CHECK(v >= -11.0);
    CHECK(v <= -9.0);
  }
}

TEST_CASE("logreg loss at zero weights with balanced labels is ln 2") {
  LogRegProblem p;
  p.features = DenseMatrix(4, 3, 0.5);
  p.labels = {0, 1, 0, 1};
  const LogRegEval ev = logreg_value_and_grad(p, DenseVector(3));
  CHECK(ev.value == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("logreg gradients match central differences") {
  LogRegProblem p;
  Rng rng(23);
  p.features = random_matrix(40, 6, rng, -2.0, 2.0);
  p.labels.resize(40);
  for (std::size_t i = 0; i < 40; ++i) p.labels[i] = rng.next_unit() < 0.5 ? 0 : 1;
  p.l2_reg = 1e-2;
  LogRegObjective obj(std::move(p));
  for (int pt = 0; pt < 20; ++pt) {
    DenseVector w(6);
    for (double& v : w.data) v = rng.next_uniform(-1.0, 1.0);
    CHECK(fd_gradient_relative_error(obj, w) <= 1e-6);
  }
}

TEST_CASE("logreg gradient points toward the separator on two points") {
  LogRegProblem p;
  p.features = DenseMatrix(2, 1);
  p.features(0, 0) = 1.0;
  p.features(1, 0) = -1.0;
  p.labels = {1, 0};
  const LogRegEval ev = logreg_value_and_grad(p, DenseVector{0.0});
  CHECK(ev.grad[0] < 0.0);  // descending drives w positive, separating the pair
}

TEST_CASE("logreg rejects non-binary labels") {
  LogRegProblem p;
  p.features = DenseMatrix(2, 2, 1.0);
  p.labels = {0, 2};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("problem validation rejects broken shapes") {
  DnmfProblem p;
  p.input = DenseMatrix(4, 5, 1.0);
  p.layer_dims = {3};
  const DenseMatrix bad_layer(4, 2, 1.0);  // cols != layer dim
  CHECK_THROWS_AS(
      dnmf_value_and_grad(p, {bad_layer}, DenseMatrix(3, 5), DenseMatrix(4, 5)),
      std::invalid_argument);

  DictLearnProblem dl;
  dl.input = DenseMatrix(4, 5, 1.0);
  dl.dict_rank = 2;
  CHECK_THROWS_AS(
      dictlearn_value_and_grad(dl, DenseMatrix(4, 2), DenseMatrix(3, 5)),
      std::invalid_argument);
}
