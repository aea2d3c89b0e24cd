#pragma once

#include "esep/bounds.hpp"
#include "esep/constraints.hpp"
#include "esep/errors.hpp"
#include "esep/graph.hpp"
#include "esep/model.hpp"
#include "esep/oracle.hpp"
#include "esep/records.hpp"
#include "esep/separation.hpp"
#include "esep/table.hpp"
