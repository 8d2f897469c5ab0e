#include "hdmr/fit.hpp"

#include <cstdio>

int main() {
    std::puts("hdmr cli placeholder");
    return 0;
}
