#ifndef UAL_UAL_HPP
#define UAL_UAL_HPP

#include "ual/al_engine.hpp"
#include "ual/annotator.hpp"
#include "ual/checkpoint.hpp"
#include "ual/data.hpp"
#include "ual/error.hpp"
#include "ual/matrix.hpp"
#include "ual/mc_dropout.hpp"
#include "ual/metrics.hpp"
#include "ual/nn.hpp"
#include "ual/query.hpp"
#include "ual/random.hpp"

#endif  // UAL_UAL_HPP
