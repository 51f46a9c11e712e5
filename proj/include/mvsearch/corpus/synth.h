#ifndef MVSEARCH_CORPUS_SYNTH_H_
#define MVSEARCH_CORPUS_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <string>

#include "mvsearch/common/rng.h"
#include "mvsearch/corpus/corpus.h"

namespace mvsearch::corpus {

// Synthetic query/code corpus with three planted signal families, each
// `per_family` entries, interleaved. Ids are "structure-NNN",
// "variable-NNN" and "api-NNN".
//
//  structure: the query names two control-flow idioms (a do-while, a
//    switch, a try/catch, ...) that appear in the code; every local uses
//    the same stock names.
//  variable: the query names two nouns that appear as subtokens of local
//    variable names; the code is straight-line arithmetic.
//  api: the query describes two JVM library calls the code makes.
//
// Only the api family calls into the JVM library.
Corpus PlantedCorpus(std::size_t per_family, std::uint64_t seed);

// A parseable Java method drawn from a broad mix of statement forms, with
// shadowing, nested blocks and unbound receivers.
std::string RandomMethod(Rng& rng);

// `n` random methods with placeholder queries; ids are "random-NNNN".
Corpus RandomMethods(std::size_t n, std::uint64_t seed);

}  // namespace mvsearch::corpus

#endif  // MVSEARCH_CORPUS_SYNTH_H_
