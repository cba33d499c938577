#include <cstdio>
int main() { std::puts("dsinv (under construction)"); return 0; }
