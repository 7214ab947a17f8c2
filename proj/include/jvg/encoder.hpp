#pragma once

#include <string>
#include <vector>

#include "jvg/model.hpp"
#include "jvg/scene_graph.hpp"
#include "jvg/types.hpp"
#include "jvg/vocabulary.hpp"

namespace jvg {

// Vocabulary indices of the tokens a node or edge contributes;
// determiners never reach the graph, so spans cover head + attributes
// for nodes and the relation phrase for edges.
using PhraseSpan = std::vector<int>;

PhraseSpan node_span(const SgNode& n, const Vocabulary& v);
PhraseSpan edge_span(const SgEdge& e, const Vocabulary& v);

// Mean of the span's embedding rows followed by a trainable affine map.
// Returns a phrase_dim vector; throws on an empty span.
Vec encode_phrase(const PhraseSpan& span, const ModelParams& params);

// Accumulates d(loss)/d(params) for one encoded phrase into `grad`
// (same layout as params.flat). `d_enc` is the adjoint of the encoding.
void encode_phrase_backward(const PhraseSpan& span, const ModelParams& params,
                            const Vec& d_enc, Vec& grad);

// Overwrites embedding rows for vocabulary tokens found in a whitespace
// text file of lines `token v1 ... vD`. Returns the number of rows loaded.
int load_pretrained_embeddings(const std::string& path, const Vocabulary& vocab,
                               ModelParams& params);

}  // namespace jvg
