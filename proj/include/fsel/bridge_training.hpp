#pragma once

#include <cstdint>
#include <vector>

#include "fsel/bridge.hpp"
#include "fsel/data.hpp"
#include "fsel/drs.hpp"
#include "fsel/selection.hpp"

namespace fsel {

struct BridgeConfig {
  double beta = 0.2;
  double tau = 4.0;
  DrsConfig model;
  TrainConfig train;
};

struct BridgeResult {
  std::vector<double> w;      // at the best validation AUC
  std::vector<double> fused;  // softmax(w * exp(tau))
  TrainResult training;
};

/// Trains a fresh surrogate and the bridge vector jointly, sampling one suffix
/// mask per batch. The rankings must cover exactly the dataset's fields.
inline BridgeResult train_bridge(const EncodedDataset& ds, const SelectionMatrix& rankings, const BridgeConfig& config,
                                 const EpochCallback& on_epoch = {}) {
  BridgeSetup setup;
  setup.positions = field_positions(rankings, ds.field_names);
  setup.beta = config.beta;
  setup.tau = config.tau;
  auto model = DrsModel::create(ds.field_names, ds.vocab_sizes(), config.model, config.train.seed);
  BridgeResult out;
  out.training = fit(std::move(model), ds, config.train, &setup, on_epoch);
  out.w = out.training.bridge_w;
  out.fused = fuse_weights(out.w, config.tau);
  return out;
}

}  // namespace fsel
