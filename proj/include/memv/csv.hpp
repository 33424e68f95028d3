#pragma once

#include <string>
#include <vector>

#include "memv/types.hpp"

namespace memv {

/**
 * Loads a comma-delimited text file with a header row and '.' decimal
 * separator. Fields may be double-quoted (with "" escaping a quote).
 * `response` and `covariates` must name distinct header columns; every
 * selected cell must parse as a finite number, otherwise the error names
 * the offending column and the 1-based data row (header excluded).
 */
Dataset load_csv(const std::string& path, const std::string& response,
                 const std::vector<std::string>& covariates);

}  // namespace memv
