export { readDataset, Dataset, DatasetRecord } from "./jsonl.js";
export { encodeEmb1, decodeEmb1, Emb1Table, EMB1_MAGIC, EMB1_VERSION } from "./emb1.js";
export {
  DETERMINISTIC_MODEL_ID,
  DeterministicHashEmbedder,
  Embedder,
  Pooling,
  TransformersEmbedder,
  makeEmbedder,
} from "./embedder.js";
export { ExportManifest, ExportResult, exportEmbeddings, manifestPathFor } from "./export.js";
