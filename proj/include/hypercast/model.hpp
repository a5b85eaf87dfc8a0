// Copyright 2026 The Hypercast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HYPERCAST_MODEL_HPP_
#define HYPERCAST_MODEL_HPP_

#include <optional>
#include <vector>

#include "hypercast/config.hpp"
#include "hypercast/encoder.hpp"
#include "hypercast/hypergraph.hpp"
#include "hypercast/prediction.hpp"
#include "hypercast/refinement.hpp"
#include "hypercast/scene.hpp"

namespace hypercast
{

/// One scene's forward pass. Refs for stages beyond the configured one stay
/// invalid.
struct ForwardOut
{
  std::vector<GeomFeatures> geoms;
  ad::Ref psi_local;  // M x D
  ad::Ref psi_global;
  ad::Ref s_pair;     // (M*M) x D
  DecoderOut aux;

  // Stage >= 2.
  ad::Ref tau;
  Eigen::MatrixXd affinity;
  Hypergraph hypergraph;
  ad::Ref psi_hyper;
  DecoderOut base;

  // Stage 3.
  ad::Ref eta;
  ad::Ref psi_consist;
  ad::Ref psi_post;
  RefineOut refined;
};

/// The staged predictor. Parameter arrays live in `params`; the blocks are
/// name bindings into it. Construction registers (and, when absent,
/// initializes) exactly the arrays the configured stage needs, which is how
/// a checkpoint from the previous stage gets extended.
class Model
{
public:
  explicit Model(const ModelConfig & cfg);
  Model(const ModelConfig & cfg, ParamStore loaded);

  ForwardOut forward(ad::Graph & g, const Scene & scene) const;

  /// World-frame multimodal predictions for every agent, from the deepest
  /// decoder the stage provides (coarse -> proposals -> refined).
  std::vector<AgentPrediction> predict(const Scene & scene) const;

  /// Stage-2 transition: main decoder starts as a copy of the auxiliary one.
  void copy_aux_to_main();

  const ModelConfig & config() const { return cfg_; }
  ParamStore & params() { return params_; }
  const ParamStore & params() const { return params_; }

  const CtnBlocks & ctn() const { return ctn_; }
  const TpnBlocks & tpn() const { return tpn_; }
  const PrnBlocks & prn() const { return prn_; }

private:
  void build();

  ModelConfig cfg_;
  ParamStore params_;
  CtnBlocks ctn_;
  TpnBlocks tpn_;
  PrnBlocks prn_;
};

}  // namespace hypercast

#endif  // HYPERCAST_MODEL_HPP_
