#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include <cstdint>

namespace dynab {

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    int jobs = 0;       // 0 = library default
    bool quiet = false;
};

// Exit codes: 0 pass, 2 config error, 3 construction/check failure,
// 4 possibly unsafe, 5 precondition, 6 unsupported.
int cmd_validate(const std::string& config_path, std::ostream& out);
int cmd_abstract(const std::string& config_path, const CliOverrides& ov, std::ostream& out);
int cmd_check(const std::string& config_path, const CliOverrides& ov, std::ostream& out);
int cmd_verify_safety(const std::string& config_path, const CliOverrides& ov,
                      std::ostream& out);
int cmd_plot_data(const std::string& config_path, const CliOverrides& ov, std::ostream& out);

}  // namespace dynab
