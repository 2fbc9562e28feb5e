#ifndef HBS_TOOLS_COMMANDS_HPP_
#define HBS_TOOLS_COMMANDS_HPP_

#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cli/config.hpp"
#include "hbs/model.hpp"

namespace hbs::cli {

/// Missing or malformed input files, unwritable outputs.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Headed numeric CSV.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  Eigen::MatrixXd numeric() const;
  Eigen::Index column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values);

/// Builds the configured model from the dataset files under io.input.
std::unique_ptr<ModelTarget> load_model(const RunConfig& config);
/// Reads io.init (or `path`): an "active" column for binary vectors,
/// otherwise one row per column of X.
State load_state(const std::string& path, const ModelTarget& model);
/// grid.modes as states of a D x 1 binary vector.
std::vector<State> parse_modes(const std::string& text, Eigen::Index size);

void cmd_simulate(const std::string& experiment, const RunConfig& config, std::ostream& log);
void cmd_run(const RunConfig& config, std::ostream& log);
void cmd_oracle(const RunConfig& config, std::ostream& log);
void cmd_grid(const RunConfig& config, std::ostream& log);
void cmd_diag(const RunConfig& config, std::ostream& log);

}  // namespace hbs::cli

#endif  // HBS_TOOLS_COMMANDS_HPP_
