#pragma once

#include "envelope/bruteforce.hpp"
#include "envelope/deviation.hpp"
#include "envelope/generate.hpp"
#include "envelope/lts.hpp"
#include "envelope/model.hpp"
#include "envelope/pipeline.hpp"
#include "envelope/report.hpp"
#include "envelope/run_control.hpp"
#include "envelope/synthesis.hpp"
