#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rope/channel.hpp"
#include "rope/scenario.hpp"

namespace rope {

// Explicit features x (4 reals for V2I, 10 for V2V) plus the one-hot traffic
// density context c.
struct FeatureVector {
    std::vector<double> x;
    std::array<double, 3> c{0.0, 0.0, 0.0};
};

struct StrengthDistribution {
    double mu = 0.0;   // dBm
    double var = 1.0;  // dB^2, always > 0
};

FeatureVector features_from_record(const LinkRecord& r);
std::array<double, 3> density_one_hot(DensityLevel level);

// V2V explicit features from the endpoint kinematics: the raw states of both
// vehicles plus the derived pair geometry (axis offsets and distance) the
// grid channel depends on but a small network cannot synthesize from raw
// coordinates.
std::vector<double> v2v_feature_values(const Vec2& pos_t, double h_t, double speed_t,
                                       const Vec2& pos_r, double h_r, double speed_r);

// Probabilistic strength model: a mean flow over the explicit features and a
// variance flow over (mean-flow hidden state, density one-hot), with a
// softplus output keeping the variance positive. All activations are tanh.
struct CapnetModel {
    LinkType link_type = LinkType::V2I;
    int in_dim = 4;
    int hidden = 64;
    int var_hidden = 32;
    // parameters, stored flat; layout documented in predictor.cpp
    std::vector<double> theta;
    // standardization statistics from the training split
    std::vector<double> x_mean, x_std;
    double y_mean = 0.0, y_std = 1.0;
    bool near_zero_variance_warning = false;

    std::size_t param_count() const;
};

struct TrainHyper {
    double learning_rate = 0.02;
    int epochs = 60;
    int batch_size = 64;
    std::uint64_t seed = 1;
    int hidden = 64;
    int var_hidden = 32;
};

struct TrainReport {
    std::vector<double> train_nll;  // per epoch, mean per-sample NLL
    std::vector<double> val_nll;
    double test_nll = 0.0;
    int best_epoch = 0;
};

CapnetModel train_capnet(const std::vector<LinkRecord>& db, LinkType link_type,
                         const TrainHyper& hyper, TrainReport* report = nullptr);

StrengthDistribution infer_strength(const CapnetModel& model, const FeatureVector& f);

// Mean Gaussian NLL of the model over a set of (feature, rss) pairs.
double capnet_nll(const CapnetModel& model, const std::vector<FeatureVector>& feats,
                  const std::vector<double>& rss);

// Loss and flat gradient for one batch of standardized inputs; exposed so the
// hand-derived backprop can be checked against finite differences.
double capnet_loss_grad(const CapnetModel& model, const std::vector<FeatureVector>& feats,
                        const std::vector<double>& rss, std::vector<double>* grad);

// Same-capacity mean-only model trained with squared error; its constant
// variance is the training residual variance. Comparison baseline.
struct FixedVarianceModel {
    CapnetModel mean_model;  // variance flow ignored
    double var = 1.0;
};
FixedVarianceModel train_fixed_variance(const std::vector<LinkRecord>& db, LinkType link_type,
                                        const TrainHyper& hyper);
double fixed_variance_nll(const FixedVarianceModel& model, const std::vector<FeatureVector>& feats,
                          const std::vector<double>& rss);

void save_model(const CapnetModel& model, const std::string& path);
CapnetModel load_model(const std::string& path);

// KNN point-estimate baseline over standardized explicit features.
double knn_predict(const std::vector<LinkRecord>& db, const FeatureVector& f, int k);

// Deterministic 6:2:2 split of record indices, shuffled by seed.
struct DataSplit {
    std::vector<std::size_t> train, val, test;
};
DataSplit split_622(std::size_t n, std::uint64_t seed);

// Constant-acceleration extrapolation from the last T+1 states.
struct PredictedMotion {
    Vec2 position;
    Vec2 velocity;
};
PredictedMotion extrapolate_motion(const std::vector<VehicleState>& history, double tau,
                                   double horizon);
PredictedMotion predict_mobility(const std::vector<VehicleState>& history, double tau,
                                 double horizon, const WorldMap& map);

}  // namespace rope
