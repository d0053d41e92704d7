#include <cstdio>

int main() {
  std::fprintf(stderr, "esnn: command-line driver not wired up yet\n");
  return 2;
}
