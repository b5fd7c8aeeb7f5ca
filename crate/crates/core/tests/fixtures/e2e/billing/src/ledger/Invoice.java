package ledger;

import java.util.ArrayList;
import java.util.List;

public class Invoice {
    private final List<Line> lines = new ArrayList<>();
    private double discountRate;
    private boolean paid;

    public void addLine(String description, int quantity, double unitPrice) {
        lines.add(new Line(description, quantity, unitPrice));
    }

    public int countLines() {
        return lines.size();
    }

    public double subtotal() {
        double subtotal = 0;
        for (Line line : lines) {
            subtotal += line.amount();
        }
        return subtotal;
    }

    public double discountAmount() {
        return subtotal() * discountRate;
    }

    public double totalAmount() {
        return subtotal() - discountAmount();
    }

    public void applyDiscount(double rate) {
        if (rate < 0 || rate > 1) {
            throw new IllegalArgumentException("discount rate out of range");
        }
        this.discountRate = rate;
    }

    public boolean isPaid() {
        return paid;
    }

    public void markPaid() {
        this.paid = true;
    }

    public void removeLine(int index) {
        lines.remove(index);
    }

    public Line largestLine() {
        Line largest = null;
        for (Line line : lines) {
            if (largest == null || line.amount() > largest.amount()) {
                largest = line;
            }
        }
        return largest;
    }

    static final class Line {
        private final String description;
        private final int quantity;
        private final double unitPrice;

        Line(String description, int quantity, double unitPrice) {
            this.description = description;
            this.quantity = quantity;
            this.unitPrice = unitPrice;
        }

        double amount() {
            double amount = quantity * unitPrice;
            return amount;
        }

        String getDescription() {
            return description;
        }
    }
}
