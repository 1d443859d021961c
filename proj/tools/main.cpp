// synchrotherm CLI: analyze | evolve | fc-table | blockade | validate.
// Exit codes: 0 success, 1 validate-suite failure, 2 validation error,
// 3 numerical failure.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "synchrotherm/cli_io.hpp"
#include "synchrotherm/errors.hpp"

int main(int argc, char** argv) {
    using namespace synchrotherm;

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        const cli::RunConfig config = cli::parse_config(args);
        return cli::run(config);
    } catch (const ValidationError& err) {
        std::cerr << "validation error: " << err.what() << '\n';
        return 2;
    } catch (const TruncationError& err) {
        std::cerr << "truncation error: " << err.what() << '\n';
        return 2;
    } catch (const IntegrationError& err) {
        std::cerr << "integration error: " << err.what()
                  << " (achieved time " << err.achieved_time() << ")\n";
        return 3;
    } catch (const NumericalError& err) {
        std::cerr << "numerical error: " << err.what() << '\n';
        return 3;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 3;
    }
}
