#ifndef NFISAC_NFISAC_HPP
#define NFISAC_NFISAC_HPP

#include "nfisac/core.hpp"
#include "nfisac/geometry.hpp"
#include "nfisac/channel.hpp"
#include "nfisac/metrics.hpp"
#include "nfisac/embedding.hpp"
#include "nfisac/conic.hpp"
#include "nfisac/optimizer.hpp"
#include "nfisac/scenario.hpp"
#include "nfisac/signalsim.hpp"
#include "nfisac/capon.hpp"
#include "nfisac/config.hpp"
#include "nfisac/pipeline.hpp"

#endif  // NFISAC_NFISAC_HPP
