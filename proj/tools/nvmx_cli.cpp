#include <cstdio>

int main() {
    std::puts("placeholder");
    return 1;
}
