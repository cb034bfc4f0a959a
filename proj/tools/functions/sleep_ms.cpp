// Sleeps for argv[1] milliseconds, or for the number read from stdin, then
// echoes the input.
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <iterator>
#include <string>
#include <thread>

int main(int argc, char** argv) {
  std::string input((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
  long ms = argc > 1 ? std::strtol(argv[1], nullptr, 10) : std::strtol(input.c_str(), nullptr, 10);
  if (ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
  std::cout << input;
  return 0;
}
