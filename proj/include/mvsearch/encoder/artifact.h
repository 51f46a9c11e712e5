#ifndef MVSEARCH_ENCODER_ARTIFACT_H_
#define MVSEARCH_ENCODER_ARTIFACT_H_

#include <filesystem>
#include <string>
#include <vector>

#include "mvsearch/encoder/model.h"

namespace mvsearch::encoder {

// Directory layout:
//   manifest.json  hyperparameters, seed, perspective, hashes, tensor table
//   vocab.txt      one token per line, index order
//   tensors.bin    little-endian float32, tensors back to back
//   loss_curve.tsv epoch and mean training loss (when a curve is given)
//
// `extra_json` (an object) is merged into the manifest under "training".
void SaveEncoder(const EncoderModel& model, const std::filesystem::path& dir,
                 const std::vector<double>& loss_curve = {},
                 const std::string& extra_json = "{}");

// Verifies the vocab and tensor hashes recorded in the manifest; throws
// FormatError on any mismatch and IoError when a file is missing.
EncoderModel LoadEncoder(const std::filesystem::path& dir);

// SHA-256 of manifest.json. The manifest pins the other files' hashes, so
// this identifies the whole artifact.
std::string ArtifactHash(const std::filesystem::path& dir);

}  // namespace mvsearch::encoder

#endif  // MVSEARCH_ENCODER_ARTIFACT_H_
