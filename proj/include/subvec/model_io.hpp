#pragma once

#include <iosfwd>
#include <string>

#include "subvec/model.hpp"

namespace subvec {

// Text export: header "<vocab> <dims>", then one "word v1 ... vd" line per
// word using the composed vectors. Readable by standard embedding tools.
void write_vectors_text(std::ostream& out, const Model& model);
void write_vectors_text_file(const std::string& path, const Model& model);

// Binary bundle with the word, context, and subword matrices, the
// vocabulary, the per-word bucket lists, and the subword spec. Subword rows
// never referenced by a vocabulary word are not stored; the loader
// regenerates them from the recorded seed, so composed vectors (IV and OOV)
// round-trip bit-exactly.
void save_model_bundle(const std::string& path, const Model& model);
Model load_model_bundle(const std::string& path);

}  // namespace subvec
