#pragma once

#include "equichar/activations.hpp"
#include "equichar/core.hpp"
#include "equichar/io.hpp"
#include "equichar/normalize.hpp"
#include "equichar/repspaces.hpp"
#include "equichar/tclass.hpp"
