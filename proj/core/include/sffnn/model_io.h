#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sffnn/bloom_map.h"
#include "sffnn/network.h"
#include "sffnn/task.h"

namespace sffnn {

// A runnable task artifact: the network plus everything needed to extract
// features for it (the embedded config text with the template set, the
// lexicons, an optional cluster Bloom map).
struct ModelFile {
  TaskKind task = TaskKind::kLangId;
  PreorderMode preorder_mode = PreorderMode::kVanilla;
  std::string config_text;
  NetworkModel net;
  std::map<std::string, Lexicon> lexicons;  // by group name
  std::optional<BloomMap> clusters;
};

// Byte sizes of the serialized sections, tracked while writing so that
// size reports always equal real file lengths.
struct ModelSections {
  uint64_t header = 0;        // magic, version, task, counts, group table
  std::vector<std::pair<std::string, uint64_t>> embeddings;  // per group
  uint64_t hidden = 0;        // weights + bias
  uint64_t output = 0;        // weights + bias
  uint64_t labels = 0;
  uint64_t config = 0;
  std::vector<std::pair<std::string, uint64_t>> resources;  // lexicons, clusters
  uint64_t total = 0;

  uint64_t EmbeddingBytes() const;
  uint64_t ResourceBytes() const;
};

// Little-endian container:
//   magic "SFFN", u32 version, u8 task, u8 preorder mode
//   u32 group count; per group: name, V, D, pooling, hashed, storage tag,
//     slot count, payload (dense: V*D float32; quantized: V rows of
//     [scale float32][D u8])
//   u32 M, u32 H0, hidden weights (M*H0 f32), hidden bias (M f32)
//   u32 K, output weights (K*M f32), output bias (K f32)
//   K length-prefixed UTF-8 labels
//   length-prefixed config text
//   u32 resource count; per resource: name, u64 length, payload
std::string SerializeModel(const ModelFile& model,
                           ModelSections* sections = nullptr);
ModelFile DeserializeModel(std::string_view bytes);

void SaveModel(const std::string& path, const ModelFile& model,
               ModelSections* sections = nullptr);
ModelFile LoadModel(const std::string& path);

}  // namespace sffnn
