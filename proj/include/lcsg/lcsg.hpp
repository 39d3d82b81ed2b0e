#pragma once

#include "lcsg/autoregressive.hpp"
#include "lcsg/csl_bridge.hpp"
#include "lcsg/derivation.hpp"
#include "lcsg/error.hpp"
#include "lcsg/grammar.hpp"
#include "lcsg/grammar_io.hpp"
#include "lcsg/grammar_predictor.hpp"
#include "lcsg/induction.hpp"
#include "lcsg/ngram.hpp"
#include "lcsg/predictor.hpp"
#include "lcsg/random.hpp"
#include "lcsg/stochastic.hpp"
#include "lcsg/symbol.hpp"
#include "lcsg/toy_attention.hpp"
#include "lcsg/trace_io.hpp"
