// Reads one expression per line and evaluates it at a fixed point.
// usage: lkit_calc [dim] [value...]   e.g. lkit_calc 3 1 2 3

#include <iostream>
#include <string>
#include <vector>

#include "lkit/expression.hpp"

int main(int argc, char** argv) {
    const std::size_t dim = argc > 1 ? std::stoul(argv[1]) : 2;
    std::vector<double> x(dim, 1.0);
    for (int i = 2; i < argc && static_cast<std::size_t>(i - 2) < dim; ++i) x[static_cast<std::size_t>(i - 2)] = std::stod(argv[i]);

    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        try {
            const auto e = lkit::parse_expression(line, dim);
            std::cout << e.to_string() << " = " << e(x) << "\n";
        } catch (const lkit::ParseError& err) {
            std::cout << line << "\n" << std::string(err.position() - 1, ' ') << "^\n" << err.what() << "\n";
        } catch (const lkit::Error& err) {
            std::cout << err.what() << "\n";
        }
    }
}
