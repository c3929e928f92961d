/*
 * (C) Copyright 2026 The qgda authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "qgda/model/grid.h"

#include <string>

#include "qgda/error.h"

namespace qgda::model {

GridSpec GridSpec::create(int n, double length) {
  if (n < 4 || (n & (n - 1)) != 0) {
    throw ConfigError("grid size must be a power of two >= 4, got " + std::to_string(n));
  }
  if (!(length > 0.0)) throw ConfigError("domain length must be positive");
  return GridSpec{n, length};
}

}  // namespace qgda::model
