// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#include "hei/genomics/train.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "hei/util/errors.hpp"
#include "hei/util/rng.hpp"

namespace hei::genomics {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                           Eigen::RowMajor>;
using EVec = Eigen::VectorXd;

Eigen::Map<const EMat> as_eigen(const util::RealMat& m) {
  return {m.a.data(), static_cast<Eigen::Index>(m.rows),
          static_cast<Eigen::Index>(m.cols)};
}

Eigen::Map<EMat> as_eigen(util::RealMat& m) {
  return {m.a.data(), static_cast<Eigen::Index>(m.rows),
          static_cast<Eigen::Index>(m.cols)};
}

// z = x w^T + 1 b^T, then a stable row-wise softmax in place.
EMat softmax_scores(const util::RealMat& x, const util::RealMat& w,
                    std::span<const double> b) {
  EMat z = as_eigen(x) * as_eigen(w).transpose();
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index k = 0; k < z.cols(); ++k) z(i, k) += b[k];
    double mx = z.row(i).maxCoeff();
    double denom = 0;
    for (Eigen::Index k = 0; k < z.cols(); ++k) {
      z(i, k) = std::exp(z(i, k) - mx);
      denom += z(i, k);
    }
    z.row(i) /= denom;
  }
  return z;
}

double l1_norm(const util::RealMat& w) {
  double s = 0;
  for (double v : w.a) s += std::abs(v);
  return s;
}

void check_train_input(const util::RealMat& x, std::span<const uint32_t> y,
                       uint32_t classes) {
  if (x.rows == 0 || x.cols == 0)
    throw ParamError("lr: empty feature matrix");
  if (y.size() != x.rows) throw ParamError("lr: label count mismatch");
  if (classes < 2) throw ParamError("lr: need at least 2 classes");
  for (uint32_t v : y)
    if (v >= classes) throw ParamError("lr: label out of range");
  for (double v : x.a)
    if (!std::isfinite(v)) throw ParamError("lr: non-finite feature value");
}

}  // namespace

double lr_objective(const util::RealMat& x, std::span<const uint32_t> y,
                    uint32_t classes, const util::RealMat& w,
                    std::span<const double> b, double lambda) {
  EMat p = softmax_scores(x, w, b);
  double loss = 0;
  for (size_t i = 0; i < x.rows; ++i)
    loss -= std::log(std::max(p(static_cast<Eigen::Index>(i), y[i]), 1e-300));
  loss /= static_cast<double>(x.rows);
  (void)classes;
  return loss + lambda * l1_norm(w);
}

void lr_smooth_gradient(const util::RealMat& x, std::span<const uint32_t> y,
                        uint32_t classes, const util::RealMat& w,
                        std::span<const double> b, util::RealMat& gw,
                        std::vector<double>& gb) {
  EMat p = softmax_scores(x, w, b);  // n x k
  for (size_t i = 0; i < x.rows; ++i)
    p(static_cast<Eigen::Index>(i), y[i]) -= 1.0;
  p /= static_cast<double>(x.rows);

  gw = util::RealMat(classes, x.cols);
  as_eigen(gw) = p.transpose() * as_eigen(x);
  gb.assign(classes, 0.0);
  for (uint32_t k = 0; k < classes; ++k) gb[k] = p.col(k).sum();
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

TrainedModel train_lr_l1(const FeatureMatrix& f, double lambda,
                         const TrainOptions& opts) {
  check_train_input(f.x, f.labels, f.classes);
  if (lambda < 0) throw ParamError("lr: negative lambda");

  const uint32_t k = f.classes;
  TrainedModel m;
  m.lambda = lambda;
  m.feature_names = f.names;
  m.w = util::RealMat(k, f.features());  // zero init
  m.b.assign(k, 0.0);

  util::RealMat gw;
  std::vector<double> gb;
  util::RealMat w_try(k, f.features());
  std::vector<double> b_try(k);

  double obj = lr_objective(f.x, f.labels, k, m.w, m.b, lambda);
  double step = opts.initial_step;
  size_t stall = 0;

  for (size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    lr_smooth_gradient(f.x, f.labels, k, m.w, m.b, gw, gb);

    double next = obj;
    bool accepted = false;
    while (step > 1e-14) {
      for (size_t i = 0; i < m.w.a.size(); ++i)
        w_try.a[i] = soft_threshold(m.w.a[i] - step * gw.a[i], step * lambda);
      for (uint32_t c = 0; c < k; ++c) b_try[c] = m.b[c] - step * gb[c];
      next = lr_objective(f.x, f.labels, k, w_try, b_try, lambda);
      if (std::isnan(next)) throw TrainError("lr: objective went NaN");
      if (next <= obj) {
        accepted = true;
        break;
      }
      step /= 2;
    }
    if (!accepted) {
      m.epochs_run = epoch;
      break;  // no direction shrinks the objective: converged
    }

    m.w.a.swap(w_try.a);
    m.b.swap(b_try);
    double improvement = obj - next;
    obj = next;
    m.epochs_run = epoch + 1;

    if (improvement <= opts.tol * std::max(1.0, std::abs(obj))) {
      if (++stall >= opts.patience) break;
    } else {
      stall = 0;
    }
    step *= 2;  // probe a larger step; the search halves it back if needed
  }

  m.final_objective = obj;
  return m;
}

util::RealMat predict_scores(const FeatureMatrix& f, const TrainedModel& m) {
  if (f.features() != m.w.cols)
    throw ParamError("predict: feature count does not match the model");
  EMat p = softmax_scores(f.x, m.w, m.b);
  util::RealMat out(f.samples(), m.w.rows);
  as_eigen(out) = p;
  return out;
}

std::vector<uint32_t> predict(const FeatureMatrix& f, const TrainedModel& m) {
  util::RealMat p = predict_scores(f, m);
  std::vector<uint32_t> labels(p.rows);
  for (size_t i = 0; i < p.rows; ++i) {
    size_t best = 0;
    for (size_t j = 1; j < p.cols; ++j)
      if (p(i, j) > p(i, best)) best = j;
    labels[i] = static_cast<uint32_t>(best);
  }
  return labels;
}

namespace {

// Threshold sweep over descending scores; tied scores collapse into one
// step so the curve is the same no matter how ties are ordered.
double roc_auc(std::span<const double> score, std::span<const uint8_t> pos) {
  size_t p = 0, n = 0;
  for (uint8_t b : pos) (b ? p : n)++;
  if (p == 0 || n == 0) return 0.0;

  std::vector<size_t> order(score.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return score[a] > score[b];
  });

  double auc = 0;
  double tpr_prev = 0, fpr_prev = 0;
  size_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < order.size()) {
    double thr = score[order[i]];
    for (; i < order.size() && score[order[i]] == thr; ++i)
      (pos[order[i]] ? tp : fp)++;
    double tpr = static_cast<double>(tp) / static_cast<double>(p);
    double fpr = static_cast<double>(fp) / static_cast<double>(n);
    auc += (fpr - fpr_prev) * (tpr + tpr_prev) / 2;
    tpr_prev = tpr;
    fpr_prev = fpr;
  }
  return auc;
}

std::vector<std::pair<double, double>> roc_points(
    std::span<const double> score, std::span<const uint8_t> pos) {
  std::vector<std::pair<double, double>> pts{{0, 0}};
  size_t p = 0, n = 0;
  for (uint8_t b : pos) (b ? p : n)++;
  if (p == 0 || n == 0) return pts;
  std::vector<size_t> order(score.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return score[a] > score[b];
  });
  size_t tp = 0, fp = 0, i = 0;
  while (i < order.size()) {
    double thr = score[order[i]];
    for (; i < order.size() && score[order[i]] == thr; ++i)
      (pos[order[i]] ? tp : fp)++;
    pts.emplace_back(static_cast<double>(fp) / static_cast<double>(n),
                     static_cast<double>(tp) / static_cast<double>(p));
  }
  return pts;
}

}  // namespace

Metrics evaluate(std::span<const uint32_t> pred,
                 std::span<const uint32_t> truth,
                 const util::RealMat& scores) {
  if (pred.size() != truth.size() || scores.rows != truth.size())
    throw ParamError("evaluate: size mismatch");
  if (truth.empty()) throw ParamError("evaluate: no samples");
  const size_t k = scores.cols;

  Metrics m;
  size_t hits = 0;
  for (size_t i = 0; i < truth.size(); ++i)
    if (pred[i] == truth[i]) ++hits;
  m.accuracy = static_cast<double>(hits) / static_cast<double>(truth.size());

  m.per_class.resize(k);
  std::vector<double> col(truth.size());
  std::vector<uint8_t> pos(truth.size());
  std::vector<double> micro_score;
  std::vector<uint8_t> micro_pos;
  micro_score.reserve(truth.size() * k);
  micro_pos.reserve(truth.size() * k);

  for (size_t c = 0; c < k; ++c) {
    size_t tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < truth.size(); ++i) {
      bool p = pred[i] == c, t = truth[i] == c;
      tp += p && t;
      fp += p && !t;
      fn += !p && t;
      col[i] = scores(i, c);
      pos[i] = t;
      micro_score.push_back(col[i]);
      micro_pos.push_back(pos[i]);
    }
    auto& cm = m.per_class[c];
    cm.precision = tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0;
    cm.recall = tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0;
    cm.f1 = cm.precision + cm.recall
                ? 2 * cm.precision * cm.recall / (cm.precision + cm.recall)
                : 0.0;
    cm.auc = roc_auc(col, pos);
  }
  m.micro_auc = roc_auc(micro_score, micro_pos);
  return m;
}

void write_metrics_json(std::ostream& os, const Metrics& m) {
  nlohmann::json j;
  j["accuracy"] = m.accuracy;
  j["micro_auc"] = m.micro_auc;
  j["classes"] = nlohmann::json::array();
  for (size_t c = 0; c < m.per_class.size(); ++c) {
    const auto& cm = m.per_class[c];
    j["classes"].push_back({{"class", c},
                            {"precision", cm.precision},
                            {"recall", cm.recall},
                            {"f1", cm.f1},
                            {"auc", cm.auc}});
  }
  os << j.dump(2) << '\n';
  if (!os) throw CodecError("metrics json write failed");
}

void write_roc_csv(std::ostream& os, const util::RealMat& scores,
                   std::span<const uint32_t> truth) {
  if (scores.rows != truth.size())
    throw ParamError("roc csv: size mismatch");
  os << "class,fpr,tpr\n";
  std::vector<double> col(truth.size());
  std::vector<uint8_t> pos(truth.size());
  auto emit = [&](const std::string& tag, std::span<const double> s,
                  std::span<const uint8_t> p) {
    for (auto [fpr, tpr] : roc_points(s, p))
      os << tag << ',' << fpr << ',' << tpr << '\n';
  };
  std::vector<double> micro_score;
  std::vector<uint8_t> micro_pos;
  for (size_t c = 0; c < scores.cols; ++c) {
    for (size_t i = 0; i < truth.size(); ++i) {
      col[i] = scores(i, c);
      pos[i] = truth[i] == c;
      micro_score.push_back(col[i]);
      micro_pos.push_back(pos[i]);
    }
    emit(std::to_string(c), col, pos);
  }
  emit("micro", micro_score, micro_pos);
  if (!os) throw CodecError("roc csv write failed");
}

SplitIndices stratified_split(std::span<const uint32_t> labels,
                              double test_fraction, uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ParamError("split: test_fraction must be in (0,1)");
  uint32_t classes = 0;
  for (uint32_t y : labels) classes = std::max(classes, y + 1);
  std::vector<std::vector<size_t>> per_class(classes);
  for (size_t i = 0; i < labels.size(); ++i) per_class[labels[i]].push_back(i);

  util::Prng rng(seed);
  SplitIndices out;
  for (auto& bucket : per_class) {
    // Fisher-Yates with the stable Prng
    for (size_t i = bucket.size(); i > 1; --i)
      std::swap(bucket[i - 1], bucket[rng.uniform_u64(i)]);
    size_t n_test = static_cast<size_t>(
        std::llround(test_fraction * static_cast<double>(bucket.size())));
    if (bucket.size() > 1) n_test = std::clamp<size_t>(n_test, 1, bucket.size() - 1);
    for (size_t i = 0; i < bucket.size(); ++i)
      (i < n_test ? out.test : out.train).push_back(bucket[i]);
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  if (out.train.empty() || out.test.empty())
    throw ParamError("split: a side came out empty");
  return out;
}

double cv_select_lambda(const FeatureMatrix& f, std::span<const double> grid,
                        size_t folds, uint64_t seed,
                        const TrainOptions& opts) {
  if (grid.empty()) throw ParamError("cv: empty lambda grid");
  if (folds < 2) throw ParamError("cv: need at least 2 folds");

  // Assign each sample a fold, stratified per class.
  std::vector<size_t> fold_of(f.samples());
  {
    uint32_t classes = f.classes;
    std::vector<std::vector<size_t>> per_class(classes);
    for (size_t i = 0; i < f.samples(); ++i)
      per_class[f.labels[i]].push_back(i);
    util::Prng rng(seed);
    for (auto& bucket : per_class) {
      for (size_t i = bucket.size(); i > 1; --i)
        std::swap(bucket[i - 1], bucket[rng.uniform_u64(i)]);
      for (size_t i = 0; i < bucket.size(); ++i)
        fold_of[bucket[i]] = i % folds;
    }
  }

  double best_lambda = grid[0];
  double best_acc = -1.0;
  for (double lambda : grid) {
    double acc_sum = 0;
    for (size_t fold = 0; fold < folds; ++fold) {
      std::vector<size_t> tr, va;
      for (size_t i = 0; i < f.samples(); ++i)
        (fold_of[i] == fold ? va : tr).push_back(i);
      if (va.empty() || tr.empty())
        throw ParamError("cv: fold came out empty; too few samples");
      FeatureMatrix ftr = select_rows(f, tr);
      FeatureMatrix fva = select_rows(f, va);
      TrainedModel m = train_lr_l1(ftr, lambda, opts);
      auto pred = predict(fva, m);
      size_t hits = 0;
      for (size_t i = 0; i < va.size(); ++i)
        if (pred[i] == fva.labels[i]) ++hits;
      acc_sum += static_cast<double>(hits) / static_cast<double>(va.size());
    }
    double acc = acc_sum / static_cast<double>(folds);
    if (acc > best_acc) {
      best_acc = acc;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

}  // namespace hei::genomics
