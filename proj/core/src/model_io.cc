#include "sffnn/model_io.h"

#include <fstream>

#include "sffnn/bytes.h"
#include "sffnn/errors.h"

namespace sffnn {
namespace {

constexpr char kMagic[4] = {'S', 'F', 'F', 'N'};
constexpr uint32_t kFormatVersion = 1;
constexpr uint8_t kStorageFloat32 = 0;
constexpr uint8_t kStorageQuantized8 = 1;

}  // namespace

uint64_t ModelSections::EmbeddingBytes() const {
  uint64_t total = 0;
  for (const auto& [name, bytes] : embeddings) total += bytes;
  return total;
}

uint64_t ModelSections::ResourceBytes() const {
  uint64_t total = 0;
  for (const auto& [name, bytes] : resources) total += bytes;
  return total;
}

std::string SerializeModel(const ModelFile& model, ModelSections* sections) {
  const NetworkModel& net = model.net;
  if (net.groups.size() != net.embeddings.size() ||
      net.groups.size() != net.slots.size()) {
    throw InternalError("serialize: inconsistent group tables");
  }
  ModelSections sec;
  ByteWriter w;

  w.Bytes(std::string_view(kMagic, 4));
  w.U32(kFormatVersion);
  w.U8(static_cast<uint8_t>(model.task));
  w.U8(static_cast<uint8_t>(model.preorder_mode));
  w.U32(static_cast<uint32_t>(net.groups.size()));
  sec.header = w.size();

  for (size_t g = 0; g < net.groups.size(); ++g) {
    const FeatureGroup& group = net.groups[g];
    const EmbeddingMatrix& emb = net.embeddings[g];
    size_t before = w.size();
    w.Str(group.name);
    w.U32(group.vocab_size);
    w.U32(group.embedding_dim);
    w.U8(static_cast<uint8_t>(group.pooling));
    w.U8(group.hashed ? 1 : 0);
    w.U8(emb.quantized() ? kStorageQuantized8 : kStorageFloat32);
    w.U32(net.slots[g]);
    if (emb.rows() != group.vocab_size || emb.cols() != group.embedding_dim) {
      throw InternalError("serialize: embedding shape mismatch for group '" +
                          group.name + "'");
    }
    if (emb.quantized()) {
      const QuantizedMatrix& q = emb.quantized_data();
      for (uint32_t i = 0; i < q.rows; ++i) {
        w.F32(q.scales[i]);
        w.Bytes(std::string_view(
            reinterpret_cast<const char*>(q.codes.data()) +
                static_cast<size_t>(i) * q.dim,
            q.dim));
      }
    } else {
      for (float v : emb.dense()) w.F32(v);
    }
    sec.embeddings.emplace_back(group.name, w.size() - before);
  }

  size_t before = w.size();
  w.U32(net.hidden_dim);
  w.U32(net.h0_dim);
  if (net.hidden_weights.size() !=
          static_cast<size_t>(net.hidden_dim) * net.h0_dim ||
      net.hidden_bias.size() != net.hidden_dim) {
    throw InternalError("serialize: hidden layer shape mismatch");
  }
  for (float v : net.hidden_weights) w.F32(v);
  for (float v : net.hidden_bias) w.F32(v);
  sec.hidden = w.size() - before;

  before = w.size();
  const uint32_t k = net.num_labels();
  w.U32(k);
  if (net.output_weights.size() != static_cast<size_t>(k) * net.hidden_dim ||
      net.output_bias.size() != k) {
    throw InternalError("serialize: output layer shape mismatch");
  }
  for (float v : net.output_weights) w.F32(v);
  for (float v : net.output_bias) w.F32(v);
  sec.output = w.size() - before;

  before = w.size();
  for (const std::string& label : net.labels) w.Str(label);
  sec.labels = w.size() - before;

  before = w.size();
  w.Str(model.config_text);
  sec.config = w.size() - before;

  uint32_t resource_count = static_cast<uint32_t>(model.lexicons.size()) +
                            (model.clusters.has_value() ? 1 : 0);
  w.U32(resource_count);
  for (const auto& [name, lexicon] : model.lexicons) {
    size_t res_before = w.size();
    w.Str("lexicon:" + name);
    ByteWriter payload;
    payload.U32(lexicon.size());
    for (const std::string& entry : lexicon.entries()) payload.Str(entry);
    w.U64(payload.size());
    w.Bytes(payload.data());
    sec.resources.emplace_back("lexicon:" + name, w.size() - res_before);
  }
  if (model.clusters.has_value()) {
    size_t res_before = w.size();
    w.Str("clusters");
    std::string payload = model.clusters->Serialize();
    w.U64(payload.size());
    w.Bytes(payload);
    sec.resources.emplace_back("clusters", w.size() - res_before);
  }

  sec.total = w.size();
  if (sections != nullptr) *sections = sec;
  return w.Take();
}

ModelFile DeserializeModel(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.Bytes(4) != std::string_view(kMagic, 4)) {
    throw DataError("model file: bad magic (expected SFFN)");
  }
  if (r.U32() != kFormatVersion) {
    throw DataError("model file: unsupported format version");
  }
  ModelFile model;
  model.task = static_cast<TaskKind>(r.U8());
  model.preorder_mode = static_cast<PreorderMode>(r.U8());
  NetworkModel& net = model.net;

  uint32_t ngroups = r.U32();
  for (uint32_t g = 0; g < ngroups; ++g) {
    FeatureGroup group;
    group.name = r.Str();
    group.vocab_size = r.U32();
    group.embedding_dim = r.U32();
    group.pooling = static_cast<Pooling>(r.U8());
    group.hashed = r.U8() != 0;
    uint8_t storage = r.U8();
    uint32_t slots = r.U32();
    if (storage == kStorageQuantized8) {
      QuantizedMatrix q;
      q.rows = group.vocab_size;
      q.dim = group.embedding_dim;
      q.scales.resize(q.rows);
      q.codes.resize(static_cast<size_t>(q.rows) * q.dim);
      for (uint32_t i = 0; i < q.rows; ++i) {
        q.scales[i] = r.F32();
        std::string_view row = r.Bytes(q.dim);
        std::copy(row.begin(), row.end(),
                  reinterpret_cast<char*>(q.codes.data()) +
                      static_cast<size_t>(i) * q.dim);
      }
      net.embeddings.push_back(EmbeddingMatrix::FromQuantized(std::move(q)));
    } else if (storage == kStorageFloat32) {
      std::vector<float> values(static_cast<size_t>(group.vocab_size) *
                                group.embedding_dim);
      for (float& v : values) v = r.F32();
      net.embeddings.push_back(EmbeddingMatrix::FromDense(
          std::move(values), group.vocab_size, group.embedding_dim));
    } else {
      throw DataError("model file: unknown embedding storage tag");
    }
    net.groups.push_back(std::move(group));
    net.slots.push_back(slots);
  }

  net.hidden_dim = r.U32();
  net.h0_dim = r.U32();
  net.hidden_weights.resize(static_cast<size_t>(net.hidden_dim) * net.h0_dim);
  for (float& v : net.hidden_weights) v = r.F32();
  net.hidden_bias.resize(net.hidden_dim);
  for (float& v : net.hidden_bias) v = r.F32();

  uint32_t k = r.U32();
  net.output_weights.resize(static_cast<size_t>(k) * net.hidden_dim);
  for (float& v : net.output_weights) v = r.F32();
  net.output_bias.resize(k);
  for (float& v : net.output_bias) v = r.F32();
  net.labels.resize(k);
  for (std::string& label : net.labels) label = r.Str();

  model.config_text = r.Str();

  uint32_t resource_count = r.U32();
  for (uint32_t i = 0; i < resource_count; ++i) {
    std::string name = r.Str();
    uint64_t length = r.U64();
    std::string_view payload = r.Bytes(length);
    if (name.starts_with("lexicon:")) {
      ByteReader pr(payload);
      uint32_t count = pr.U32();
      std::vector<std::string> entries;
      entries.reserve(count);
      for (uint32_t e = 0; e < count; ++e) entries.push_back(pr.Str());
      model.lexicons.emplace(name.substr(8), Lexicon(std::move(entries)));
    } else if (name == "clusters") {
      model.clusters = BloomMap::Deserialize(payload);
    } else {
      throw DataError("model file: unknown resource '" + name + "'");
    }
  }
  if (!r.AtEnd()) {
    throw DataError("model file: trailing bytes");
  }

  uint32_t expected_h0 = NetworkModel::ComputeH0(net.groups, net.slots);
  if (expected_h0 != net.h0_dim) {
    throw DataError("model file: h0 size does not match the group table");
  }
  return model;
}

void SaveModel(const std::string& path, const ModelFile& model,
               ModelSections* sections) {
  std::string bytes = SerializeModel(model, sections);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing '" + path + "'");
}

ModelFile LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return DeserializeModel(bytes);
}

}  // namespace sffnn
