#pragma once

#include "benney/bourgain.hpp"
#include "benney/criterion.hpp"
#include "benney/dynamics.hpp"
#include "benney/elliptic.hpp"
#include "benney/fourier.hpp"
#include "benney/hill.hpp"
#include "benney/waves.hpp"
