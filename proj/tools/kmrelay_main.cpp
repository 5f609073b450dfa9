#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "kmrelay/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        const auto cfg = kmrelay::cli::parse_args(args);
        return kmrelay::cli::run(cfg, std::cout, std::cerr);
    } catch (const kmrelay::cli::ExitRequest& e) {
        std::cout << e.text << '\n';
        return 0;
    } catch (const kmrelay::cli::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        std::cerr << "run 'kmrelay --help' for usage\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
