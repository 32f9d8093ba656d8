#ifndef TONECRAFT_CORPUS_HPP
#define TONECRAFT_CORPUS_HPP

#include "tonecraft/corpus/io.hpp"
#include "tonecraft/corpus/pairs.hpp"
#include "tonecraft/corpus/text.hpp"
#include "tonecraft/corpus/threads.hpp"
#include "tonecraft/corpus/types.hpp"
#include "tonecraft/corpus/vocabulary.hpp"

#endif  // TONECRAFT_CORPUS_HPP
