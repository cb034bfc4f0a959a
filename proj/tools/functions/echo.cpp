// Copies stdin to stdout.
#include <unistd.h>

int main() {
  char buf[65536];
  for (;;) {
    ssize_t n = ::read(STDIN_FILENO, buf, sizeof(buf));
    if (n == 0) return 0;
    if (n < 0) return 1;
    for (ssize_t off = 0; off < n;) {
      ssize_t w = ::write(STDOUT_FILENO, buf + off, static_cast<size_t>(n - off));
      if (w <= 0) return 1;
      off += w;
    }
  }
}
