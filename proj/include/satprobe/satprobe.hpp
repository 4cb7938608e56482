#ifndef SATPROBE_SATPROBE_HPP
#define SATPROBE_SATPROBE_HPP

#include "satprobe/actlog.hpp"
#include "satprobe/aggregate.hpp"
#include "satprobe/analyzer.hpp"
#include "satprobe/covariance.hpp"
#include "satprobe/pooling.hpp"
#include "satprobe/report.hpp"
#include "satprobe/spectral.hpp"
#include "satprobe/toynet.hpp"

#endif
