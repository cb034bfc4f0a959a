// Never returns; used to exercise executor timeouts.
#include <unistd.h>

int main() {
  for (;;) ::pause();
}
