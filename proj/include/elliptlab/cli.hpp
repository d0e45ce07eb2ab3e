#ifndef ELLIPTLAB_CLI_HPP
#define ELLIPTLAB_CLI_HPP

namespace elliptlab::cli {

int run(int argc, char** argv);

}  // namespace elliptlab::cli

#endif
