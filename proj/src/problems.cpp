#include "home3/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace home3 {

static double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// ---------------------------------------------------------------------------
// Dictionary learning
// ---------------------------------------------------------------------------

void DictLearnProblem::validate() const {
  if (input.rows == 0 || input.cols == 0) {
    throw std::invalid_argument("DictLearnProblem: empty input matrix");
  }
  if (lambda < 0.0) throw std::invalid_argument("DictLearnProblem: lambda < 0");
  if (dict_rank == 0) throw std::invalid_argument("DictLearnProblem: dict_rank = 0");
}

DictLearnEval dictlearn_value_and_grad(const DictLearnProblem& p,
                                       const DenseMatrix& x, const DenseMatrix& y) {
  if (x.rows != p.input.rows || y.cols != p.input.cols || x.cols != y.rows) {
    throw std::invalid_argument("dictlearn: shape mismatch X " + x.shape_str() +
                                ", Y " + y.shape_str() + ", I " +
                                p.input.shape_str());
  }
  const DenseMatrix residual = sub(p.input, matmul(x, y));
  const double r = frobenius_norm(residual);

  DictLearnEval out;
  out.value = r + p.lambda * sum_abs(y);

  DenseMatrix normalized =
      r > 0.0 ? scale(residual, 1.0 / r) : DenseMatrix(residual.rows, residual.cols);
  out.grad_x = scale(matmul(normalized, transpose(y)), -1.0);
  out.grad_y = scale(matmul(transpose(x), normalized), -1.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    out.grad_y.data[i] += p.lambda * sign0(y.data[i]);
  }
  return out;
}

double reconstruction_loss_dl(const DictLearnProblem& p, const DenseMatrix& x,
                              const DenseMatrix& y) {
  const double denom = frobenius_norm(p.input);
  if (denom == 0.0) {
    throw std::invalid_argument("reconstruction_loss_dl: zero input matrix");
  }
  return frobenius_norm(sub(p.input, matmul(x, y))) / denom;
}

// ---------------------------------------------------------------------------
// DNMF
// ---------------------------------------------------------------------------

void DnmfProblem::validate() const {
  if (input.rows == 0 || input.cols == 0) {
    throw std::invalid_argument("DnmfProblem: empty input matrix");
  }
  if (layer_dims.empty()) throw std::invalid_argument("DnmfProblem: no layers");
  for (std::size_t d : layer_dims) {
    if (d == 0) throw std::invalid_argument("DnmfProblem: zero layer dim");
  }
  if (noise_amplitude < 0.0) {
    throw std::invalid_argument("DnmfProblem: noise_amplitude < 0");
  }
  if (penalty_mu < 0.0) throw std::invalid_argument("DnmfProblem: penalty_mu < 0");
}

static void check_dnmf_shapes(const DnmfProblem& p,
                              const std::vector<DenseMatrix>& layers,
                              const DenseMatrix& y, const DenseMatrix& z) {
  if (layers.size() != p.layer_count()) {
    throw std::invalid_argument("dnmf: expected " +
                                std::to_string(p.layer_count()) + " layers, got " +
                                std::to_string(layers.size()));
  }
  std::size_t prev = p.input.rows;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].rows != prev || layers[i].cols != p.layer_dims[i]) {
      throw std::invalid_argument("dnmf: layer " + std::to_string(i) + " shape " +
                                  layers[i].shape_str() + " breaks the chain");
    }
    prev = p.layer_dims[i];
  }
  if (y.rows != prev || y.cols != p.input.cols) {
    throw std::invalid_argument("dnmf: feature matrix shape " + y.shape_str() +
                                " incompatible with chain");
  }
  if (z.rows != p.input.rows || z.cols != p.input.cols) {
    throw std::invalid_argument("dnmf: noise matrix shape " + z.shape_str() +
                                " != input " + p.input.shape_str());
  }
}

DnmfEval dnmf_value_and_grad(const DnmfProblem& p,
                             const std::vector<DenseMatrix>& layers,
                             const DenseMatrix& y, const DenseMatrix& z) {
  check_dnmf_shapes(p, layers, y, z);
  const std::size_t k = layers.size();

  // prefix[j] = X_1 ... X_j (prefix[0] empty marker = identity),
  // suffix[j] = X_{j+1} ... X_k (suffix[k] identity).
  std::vector<DenseMatrix> prefix(k + 1), suffix(k + 1);
  prefix[0] = DenseMatrix();  // identity sentinel
  for (std::size_t j = 1; j <= k; ++j) {
    prefix[j] = j == 1 ? layers[0] : matmul(prefix[j - 1], layers[j - 1]);
  }
  suffix[k] = DenseMatrix();  // identity sentinel
  for (std::size_t j = k; j-- > 0;) {
    suffix[j] = j == k - 1 ? layers[k - 1] : matmul(layers[j], suffix[j + 1]);
  }

  const DenseMatrix activated = relu(y);
  const DenseMatrix product = matmul(prefix[k], activated);
  const DenseMatrix residual = sub(add(product, z), p.input);
  const double r = frobenius_norm(residual);

  DnmfEval out;
  out.value = r + p.penalty_mu * sum_abs(z);

  const DenseMatrix normalized =
      r > 0.0 ? scale(residual, 1.0 / r) : DenseMatrix(residual.rows, residual.cols);

  out.grad_z = normalized;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out.grad_z.data[i] += p.penalty_mu * sign0(z.data[i]);
  }

  // d/dY: (P^T N) masked by relu'(Y); relu' at 0 is 0.
  out.grad_y = matmul(transpose(prefix[k]), normalized);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y.data[i] > 0.0)) out.grad_y.data[i] = 0.0;
  }

  out.grad_layers.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    // right = (X_{j+2}..X_k) relu(Y), as a matrix; identity suffix means relu(Y).
    const DenseMatrix right =
        j == k - 1 ? activated : matmul(suffix[j + 1], activated);
    const DenseMatrix core = matmul(normalized, transpose(right));
    out.grad_layers[j] = j == 0 ? core : matmul(transpose(prefix[j]), core);
  }
  return out;
}

double reconstruction_loss_dnmf(const DnmfProblem& p,
                                const std::vector<DenseMatrix>& layers,
                                const DenseMatrix& y, const DenseMatrix& z) {
  check_dnmf_shapes(p, layers, y, z);
  const double denom = frobenius_norm(p.input);
  if (denom == 0.0) {
    throw std::invalid_argument("reconstruction_loss_dnmf: zero input matrix");
  }
  // Same left-to-right association as the objective path.
  DenseMatrix chain = layers[0];
  for (std::size_t j = 1; j < layers.size(); ++j) chain = matmul(chain, layers[j]);
  return frobenius_norm(sub(add(matmul(chain, relu(y)), z), p.input)) / denom;
}

DenseMatrix inject_noise(const DenseMatrix& y, Rng& rng) {
  if (y.size() == 0) throw std::invalid_argument("inject_noise: empty matrix");
  const double amp = 0.1 * std::abs(median_of_entries(y));
  DenseMatrix out = y;
  if (amp == 0.0) return out;
  for (double& v : out.data) v += rng.next_uniform(-amp, amp);
  return out;
}

// ---------------------------------------------------------------------------
// Logistic regression
// ---------------------------------------------------------------------------

void LogRegProblem::validate() const {
  if (features.rows == 0 || features.cols == 0) {
    throw std::invalid_argument("LogRegProblem: empty feature matrix");
  }
  if (labels.size() != features.rows) {
    throw std::invalid_argument("LogRegProblem: " + std::to_string(labels.size()) +
                                " labels for " + std::to_string(features.rows) +
                                " rows");
  }
  for (int l : labels) {
    if (l != 0 && l != 1) {
      throw std::invalid_argument("LogRegProblem: labels must be 0 or 1");
    }
  }
  if (l2_reg < 0.0) throw std::invalid_argument("LogRegProblem: l2_reg < 0");
}

LogRegEval logreg_value_and_grad(const LogRegProblem& p, const DenseVector& w) {
  const std::size_t n = p.features.rows;
  const std::size_t d = p.features.cols;
  if (w.dim() != d) {
    throw std::invalid_argument("logreg: weight dim " + std::to_string(w.dim()) +
                                " != feature dim " + std::to_string(d));
  }

  LogRegEval out;
  out.grad = DenseVector(d);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &p.features.data[i * d];
    double z = 0.0;
    for (std::size_t j = 0; j < d; ++j) z += row[j] * w[j];
    const double yi = static_cast<double>(p.labels[i]);
    // log(1 + e^z) - y z, written to avoid overflow for large |z|.
    loss += (z > 0.0 ? z : 0.0) - yi * z + std::log1p(std::exp(-std::abs(z)));
    const double sigma = 1.0 / (1.0 + std::exp(-z));
    const double coeff = (sigma - yi) / static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) out.grad[j] += coeff * row[j];
  }
  loss /= static_cast<double>(n);

  double wsq = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    out.grad[j] += p.l2_reg * w[j];
    wsq += w[j] * w[j];
  }
  out.value = loss + 0.5 * p.l2_reg * wsq;
  return out;
}

// ---------------------------------------------------------------------------
// Adapters
// ---------------------------------------------------------------------------

DictLearnObjective::DictLearnObjective(DictLearnProblem p)
    : prob_(std::move(p)),
      layout_({{prob_.input.rows, prob_.dict_rank},
               {prob_.dict_rank, prob_.input.cols}}) {
  prob_.validate();
}

double DictLearnObjective::value(const DenseVector& x) const {
  return dictlearn_value_and_grad(prob_, layout_.unpack(x, 0), layout_.unpack(x, 1))
      .value;
}

DenseVector DictLearnObjective::gradient(const DenseVector& x) const {
  DictLearnEval ev =
      dictlearn_value_and_grad(prob_, layout_.unpack(x, 0), layout_.unpack(x, 1));
  return layout_.pack({ev.grad_x, ev.grad_y});
}

double DictLearnObjective::metric(const DenseVector& x) const {
  return reconstruction_loss_dl(prob_, layout_.unpack(x, 0), layout_.unpack(x, 1));
}

static ParamLayout dnmf_layout(const DnmfProblem& p) {
  std::vector<MatrixShape> shapes;
  std::size_t prev = p.input.rows;
  for (std::size_t d : p.layer_dims) {
    shapes.push_back({prev, d});
    prev = d;
  }
  shapes.push_back({prev, p.input.cols});          // Y
  shapes.push_back({p.input.rows, p.input.cols});  // Z
  return ParamLayout(shapes);
}

DnmfObjective::DnmfObjective(DnmfProblem p)
    : prob_(std::move(p)), layout_(dnmf_layout(prob_)) {
  prob_.validate();
  const MatrixShape& ys = layout_.shape(prob_.layer_count());
  noise_ = DenseMatrix(ys.rows, ys.cols, 0.0);
}

DnmfObjective::Unpacked DnmfObjective::unpack(const DenseVector& x) const {
  Unpacked u;
  const std::size_t k = prob_.layer_count();
  u.layers.reserve(k);
  for (std::size_t j = 0; j < k; ++j) u.layers.push_back(layout_.unpack(x, j));
  u.y = layout_.unpack(x, k);
  u.z = layout_.unpack(x, k + 1);
  return u;
}

std::string DnmfObjective::name() const {
  return prob_.noise_amplitude > 0.0 ? "dnmf_noisy" : "dnmf";
}

void DnmfObjective::begin_iteration(std::uint64_t iter, std::uint64_t run_seed,
                                    const DenseVector& current) {
  if (prob_.noise_amplitude <= 0.0) return;
  const DenseMatrix y = layout_.unpack(current, prob_.layer_count());
  const double amp = prob_.noise_amplitude * std::abs(median_of_entries(y));
  Rng rng(mix_seed(run_seed ^ 0x6e6f697379ULL, iter));
  for (double& v : noise_.data) v = amp == 0.0 ? 0.0 : rng.next_uniform(-amp, amp);
}

double DnmfObjective::value(const DenseVector& x) const {
  Unpacked u = unpack(x);
  if (prob_.noise_amplitude > 0.0) u.y = add(u.y, noise_);
  return dnmf_value_and_grad(prob_, u.layers, u.y, u.z).value;
}

DenseVector DnmfObjective::gradient(const DenseVector& x) const {
  Unpacked u = unpack(x);
  if (prob_.noise_amplitude > 0.0) u.y = add(u.y, noise_);
  DnmfEval ev = dnmf_value_and_grad(prob_, u.layers, u.y, u.z);
  std::vector<DenseMatrix> blocks = std::move(ev.grad_layers);
  blocks.push_back(std::move(ev.grad_y));
  blocks.push_back(std::move(ev.grad_z));
  return layout_.pack(blocks);
}

double DnmfObjective::metric(const DenseVector& x) const {
  const Unpacked u = unpack(x);
  return reconstruction_loss_dnmf(prob_, u.layers, u.y, u.z);
}

LogRegObjective::LogRegObjective(LogRegProblem p) : prob_(std::move(p)) {
  prob_.validate();
}

double LogRegObjective::value(const DenseVector& x) const {
  return logreg_value_and_grad(prob_, x).value;
}

DenseVector LogRegObjective::gradient(const DenseVector& x) const {
  return logreg_value_and_grad(prob_, x).grad;
}

}  // namespace home3
