#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "kanjidist/api.hpp"

namespace httplib {
class Server;
}

namespace kanjidist {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitIo = 2,
  kExitUnknownKanji = 3,
  kExitBadArguments = 4,
  kExitServe = 5,
};

/// Runs one command line (program name excluded) and returns its exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// An HTTP server exposing the /v1 API of `handler` with CORS headers.
std::unique_ptr<httplib::Server> make_http_server(ApiHandler& handler);

}  // namespace kanjidist
