#pragma once

#include "errors.hpp"
#include "numerics.hpp"
#include "scenario.hpp"
#include "visibility.hpp"
#include "gaussian_fisher.hpp"
#include "classical_fisher.hpp"
#include "closed_forms.hpp"
#include "config.hpp"
#include "analysis.hpp"
#include "validation.hpp"
