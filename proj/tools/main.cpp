#include <cstdio>

int main() {
  std::fprintf(stderr, "quantband: command line not wired up yet\n");
  return 2;
}
