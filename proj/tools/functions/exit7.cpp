// Consumes its input and fails with exit code 7.
#include <unistd.h>

int main() {
  char buf[4096];
  while (::read(STDIN_FILENO, buf, sizeof(buf)) > 0) {
  }
  return 7;
}
