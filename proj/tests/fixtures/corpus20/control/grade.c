#include <stdio.h>

char grade(int score) {
  if (score >= 90)
    return 'A';
  else if (score >= 80)
    return 'B';
  else if (score >= 70)
    return 'C';
  else if (score >= 60)
    return 'D';
  return 'F';
}

int main(void) {
  for (int s = 55; s <= 95; s += 10) putchar(grade(s));
  putchar('\n');
  return 0;
}
