#pragma once

#include "align.hpp"
#include "augment.hpp"
#include "corpus.hpp"
#include "eval.hpp"
#include "gazetteer.hpp"
#include "iterate.hpp"
#include "kb.hpp"
#include "label.hpp"
#include "linear.hpp"
#include "llm_io.hpp"
#include "remote.hpp"
#include "retrieval.hpp"
#include "tagger.hpp"
