// Copyright (C) 2026 heinfer authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hei/genomics/features.hpp"
#include "hei/util/matrix.hpp"

namespace hei::genomics {

// Multinomial logistic regression with an L1 penalty on the weights,
// minimized by full-batch proximal gradient: gradient step on the smooth
// cross-entropy, soft-threshold by step*lambda on W, bias unpenalized.
// A halving line search keeps the penalized objective non-increasing.

struct TrainOptions {
  size_t epochs = 10000;
  // Stop early when the relative objective improvement stays below tol for
  // patience consecutive accepted steps.
  double tol = 1e-9;
  size_t patience = 5;
  double initial_step = 1.0;
};

struct TrainedModel {
  util::RealMat w;  // classes x features
  std::vector<double> b;
  double lambda = 0.0;
  std::vector<std::string> feature_names;
  double final_objective = 0.0;
  size_t epochs_run = 0;
};

// TrainError if the loss goes non-finite; ParamError on degenerate input
// (fewer than 2 classes, shape mismatch, non-finite features).
TrainedModel train_lr_l1(const FeatureMatrix& f, double lambda,
                         const TrainOptions& opts = {});

// Pieces of the objective, exposed so tests can check the gradient against
// finite differences and the shrinkage rule in isolation.
double lr_objective(const util::RealMat& x, std::span<const uint32_t> y,
                    uint32_t classes, const util::RealMat& w,
                    std::span<const double> b, double lambda);
void lr_smooth_gradient(const util::RealMat& x, std::span<const uint32_t> y,
                        uint32_t classes, const util::RealMat& w,
                        std::span<const double> b, util::RealMat& gw,
                        std::vector<double>& gb);
double soft_threshold(double v, double t);

// Row-wise softmax probabilities of W x + b.
util::RealMat predict_scores(const FeatureMatrix& f, const TrainedModel& m);
// Argmax labels (ties to the lowest class).
std::vector<uint32_t> predict(const FeatureMatrix& f, const TrainedModel& m);

struct ClassMetrics {
  double precision = 0, recall = 0, f1 = 0, auc = 0;
};
struct Metrics {
  double accuracy = 0;
  std::vector<ClassMetrics> per_class;
  double micro_auc = 0;
};

// Counting metrics use the 0/0 -> 0 convention (absent class, empty
// prediction). Per-class AUC is one-vs-rest over the softmax scores via a
// full threshold sweep with trapezoidal area; a class with no positives or
// no negatives in truth gets AUC 0. The micro average pools every
// (sample, class) decision into one sweep.
Metrics evaluate(std::span<const uint32_t> pred,
                 std::span<const uint32_t> truth, const util::RealMat& scores);

void write_metrics_json(std::ostream& os, const Metrics& m);
// long format: class,fpr,tpr rows per class plus micro rows
void write_roc_csv(std::ostream& os, const util::RealMat& scores,
                   std::span<const uint32_t> truth);

struct SplitIndices {
  std::vector<size_t> train, test;
};
// Per-class shuffle under the seed, test_fraction of each class held out.
SplitIndices stratified_split(std::span<const uint32_t> labels,
                              double test_fraction, uint64_t seed);

// Mean validation accuracy over stratified folds for each lambda in the
// grid; best wins, ties to the earlier grid entry.
double cv_select_lambda(const FeatureMatrix& f,
                        std::span<const double> grid, size_t folds,
                        uint64_t seed, const TrainOptions& opts = {});

}  // namespace hei::genomics
