#pragma once

#include <iosfwd>
#include <string>

#include "qcluster/core.hpp"

namespace qcluster {

/// Reads `group,item_1,...,item_d` CSV. Empty fields are missing values;
/// malformed input raises input_error with line/column diagnostics.
QuestionnaireMatrix read_csv(std::istream& in);
QuestionnaireMatrix read_csv_file(const std::string& path);

/// Writes the same format; integral values print without a decimal point,
/// so generate -> parse round-trips losslessly.
void write_csv(std::ostream& out, const QuestionnaireMatrix& matrix);
void write_csv_file(const std::string& path, const QuestionnaireMatrix& matrix);

}  // namespace qcluster
